"""Jury's stability criterion over exact, interval, and fixed-point
coefficients, plus a root-modulus oracle used by the test suite.

For S(z) = a0 z^N + ... + aN with a0 > 0 the verdict is Stable iff:

  R1: S(1) > 0
  R2: (-1)^N S(-1) > 0
  R3: |aN| < |a0|
  R4: the leading entry of every reduced table row is > 0, where each
      reduction maps [c0 .. ck] to [c0 - (ck/c0) ck, ...] of length k
      (N-1 reductions, down to a degree-1 row; stopping one step earlier
      provably disagrees with the root oracle).

R3 follows the standard magnitude convention |aN| < |a0|; the reversed
form seen in some statements of the test is available behind a flag for
auditing.
"""

from __future__ import annotations

import enum
from dataclasses import dataclass
from fractions import Fraction

from .errors import DegenerateCharPoly
from .intervals import IntervalPoly, RationalInterval, iv_add, iv_div, iv_mul, iv_sub
from .transfer import Poly


class Status(enum.Enum):
    STABLE = "Stable"
    UNSTABLE = "Unstable"
    UNKNOWN = "Unknown"


@dataclass(frozen=True)
class JuryVerdict:
    status: Status
    violated: str | None
    margin: Fraction

    @property
    def is_stable(self) -> bool:
        return self.status is Status.STABLE


@dataclass(frozen=True)
class JuryTable:
    """The reduction rows as generated (each block: row and its reverse)."""

    rows: tuple


def jury_table(s: Poly) -> JuryTable:
    c = list(s.normalize().coeffs)
    if c[0] == 0:
        raise DegenerateCharPoly("zero leading coefficient")
    if c[0] < 0:
        c = [-x for x in c]
    rows = []
    row = c
    while len(row) > 2:
        rows.append(tuple(row))
        rows.append(tuple(reversed(row)))
        pivot = row[0]
        if pivot == 0:
            break
        alpha = row[-1] / pivot
        row = [row[i] - alpha * row[len(row) - 1 - i] for i in range(len(row) - 1)]
    if len(rows) == 0 and len(row) >= 2:
        rows.append(tuple(row))
        rows.append(tuple(reversed(row)))
    return JuryTable(tuple(rows))


def _conditions(c):
    """Ordered (label, value) stability conditions for exact coefficients
    with c[0] > 0.  Yields None values when a table pivot vanishes."""
    n = len(c) - 1
    yield "R1", sum(c)
    yield "R2", sum(x if i % 2 == 0 else -x for i, x in enumerate(c))
    yield "R3", abs(c[0]) - abs(c[-1])
    row = c
    while len(row) > 2:
        pivot = row[0]
        if pivot == 0:
            yield "R4", None
            return
        alpha = row[-1] / pivot
        row = [row[i] - alpha * row[len(row) - 1 - i] for i in range(len(row) - 1)]
        yield "R4", row[0]


def jury_stable(s: Poly, reversed_r3: bool = False) -> JuryVerdict:
    """Three-valued Jury verdict for an exact polynomial."""
    s = s.normalize()
    c = list(s.coeffs)
    if all(x == 0 for x in c):
        raise DegenerateCharPoly("zero polynomial")
    if len(c) == 1:
        # Degree zero: no roots at all.
        return JuryVerdict(Status.STABLE, None, abs(c[0]))
    if c[0] < 0:
        c = [-x for x in c]
    margin = None
    for label, value in _conditions(c):
        if value is None:
            # Singular table: zero pivot, verdict undecidable here.
            return JuryVerdict(Status.UNKNOWN, "R4",
                               min(margin, Fraction(0)) if margin is not None else Fraction(0))
        if label == "R3" and reversed_r3:
            value = c[-1] - abs(c[0])
        if margin is None or value < margin:
            margin = value
        if value <= 0:
            return JuryVerdict(Status.UNSTABLE, label, margin)
    return JuryVerdict(Status.STABLE, None, margin)


def _iconditions(civ):
    """Interval analogue of `_conditions`; civ has strictly positive leading
    interval.  Yields None when a pivot interval contains zero."""
    zero = RationalInterval.point(0)
    acc = zero
    for c in civ:
        acc = iv_add(acc, c)
    yield "R1", acc
    acc = zero
    for i, c in enumerate(civ):
        acc = iv_add(acc, c if i % 2 == 0 else -c)
    yield "R2", acc
    yield "R3", iv_sub(civ[0].abs(), civ[-1].abs())
    row = list(civ)
    while len(row) > 2:
        if row[0].contains_zero():
            yield "R4", None
            return
        alpha = iv_div(row[-1], row[0])
        row = [iv_sub(row[i], iv_mul(alpha, row[len(row) - 1 - i]))
               for i in range(len(row) - 1)]
        yield "R4", row[0]


def jury_stable_interval(s: IntervalPoly) -> JuryVerdict:
    """Jury verdict holding for an entire interval polynomial family.

    Stable: every condition strictly positive over the whole family.
    Unstable: some condition nonpositive for every member.
    Unknown otherwise (including a leading or pivot interval through zero).
    """
    civ = list(s.coeffs)
    lead = civ[0]
    if lead.contains_zero():
        return JuryVerdict(Status.UNKNOWN, None, min(Fraction(0), lead.lo))
    if lead.hi < 0:
        civ = [-c for c in civ]
    if len(civ) == 1:
        return JuryVerdict(Status.STABLE, None, civ[0].lo)
    incomplete = False
    margin = None
    first_violated = None
    for label, iv in _iconditions(civ):
        if iv is None:
            incomplete = True
            break
        if margin is None or iv.lo < margin:
            margin = iv.lo
        if iv.hi <= 0:
            return JuryVerdict(Status.UNSTABLE, label, margin)
        if iv.lo <= 0 and first_violated is None:
            first_violated = label
    if margin is None:
        margin = Fraction(0)
    if incomplete or first_violated is not None:
        return JuryVerdict(Status.UNKNOWN, first_violated or "R4",
                           min(margin, Fraction(0)))
    return JuryVerdict(Status.STABLE, None, margin)


def root_oracle(s: Poly) -> float:
    """Maximum root modulus via companion-matrix eigenvalues (test oracle)."""
    import numpy as np

    s = s.normalize()
    if s.degree < 1:
        raise ValueError("root oracle needs degree >= 1")
    roots = np.roots([float(c) for c in s.coeffs])
    if len(roots) == 0:
        return 0.0
    return float(max(abs(roots)))
