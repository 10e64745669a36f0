"""Stability table: exact verdicts, interval verdicts, and oracle agreement."""

import random
from fractions import Fraction

import pytest

from dcsynth.errors import DegenerateCharPoly
from dcsynth.intervals import IntervalPoly, RationalInterval
from dcsynth.stability import (Status, jury_stable, jury_stable_interval,
                               jury_table, root_oracle)
from dcsynth.transfer import Poly


def test_known_verdicts():
    assert jury_stable(Poly([1, Fraction(-1, 2)])).is_stable
    assert not jury_stable(Poly([1, -2])).is_stable
    # (z - 1/2)(z - 1/3): stable second order.
    assert jury_stable(Poly([1, Fraction(-5, 6), Fraction(1, 6)])).is_stable
    # Root exactly on the unit circle is not stable.
    assert not jury_stable(Poly([1, -1])).is_stable
    # Degree zero has no roots at all.
    assert jury_stable(Poly([3])).is_stable


def test_negative_leading_coefficient_is_normalized():
    p = Poly([-2, 1])  # root at 1/2
    assert jury_stable(p).is_stable


def test_violated_labels():
    # S(1) <= 0.
    v = jury_stable(Poly([1, -3, 1]))
    assert not v.is_stable and v.violated == "R1"
    # |aN| >= |a0| with S(1) > 0 and alternating sum > 0.
    v = jury_stable(Poly([1, 0, Fraction(3, 2)]))
    assert not v.is_stable and v.violated == "R3"


def test_margin_sign_convention():
    stable = jury_stable(Poly([1, Fraction(-1, 2)]))
    assert stable.margin > 0
    unstable = jury_stable(Poly([1, -2]))
    assert unstable.margin <= 0


def test_zero_polynomial_raises():
    with pytest.raises(DegenerateCharPoly):
        jury_stable(Poly([0, 0]))


def test_table_rows_shrink_to_length_two():
    table = jury_table(Poly([1, 0, 0, Fraction(1, 8)]))
    lengths = [len(r) for r in table.rows[::2]]
    assert lengths == [4, 3]


def test_reversed_r3_flag():
    # Standard convention: |aN| < |a0| holds for z^2 + 0.5.
    p = Poly([1, 0, Fraction(1, 2)])
    assert jury_stable(p).is_stable
    # The reversed form demands aN > |a0| and rejects it.
    assert not jury_stable(p, reversed_r3=True).is_stable


def _random_poly(rng, max_degree=6):
    degree = rng.randint(1, max_degree)
    coeffs = [Fraction(rng.randint(-2000, 2000), 1000)
              for _ in range(degree + 1)]
    if coeffs[0] == 0:
        coeffs[0] = Fraction(1)
    return Poly(coeffs)


def test_oracle_agreement_sample():
    """Smaller companion to the acceptance-scale agreement suite."""
    rng = random.Random(7)
    for _ in range(1500):
        p = _random_poly(rng)
        rho = root_oracle(p)
        if abs(rho - 1.0) < 1e-4:
            continue
        verdict = jury_stable(p)
        if verdict.status is Status.UNKNOWN:
            continue
        assert verdict.is_stable == (rho < 1.0), (p.coeffs, rho)


def test_interval_point_matches_exact():
    rng = random.Random(8)
    for _ in range(300):
        p = _random_poly(rng, max_degree=4)
        exact = jury_stable(p)
        if exact.status is Status.UNKNOWN:
            continue
        interval = jury_stable_interval(IntervalPoly.from_exact(p.coeffs))
        if interval.status is Status.UNKNOWN:
            # Interval mode may be conservative but never wrong.
            continue
        assert interval.status == exact.status


def test_interval_stable_family():
    # (z - a) for a in [0.2, 0.4]: every member stable.
    s = IntervalPoly([RationalInterval(1, 1),
                      RationalInterval(Fraction(-2, 5), Fraction(-1, 5))])
    v = jury_stable_interval(s)
    assert v.status is Status.STABLE
    assert v.margin > 0


def test_interval_unstable_family():
    # (z - a) for a in [2, 3]: every member unstable (R1 < 0 throughout).
    s = IntervalPoly([RationalInterval(1, 1), RationalInterval(-3, -2)])
    assert jury_stable_interval(s).status is Status.UNSTABLE


def test_interval_unknown_cases():
    # Family straddles the unit circle.
    s = IntervalPoly([RationalInterval(1, 1),
                      RationalInterval(Fraction(-3, 2), Fraction(-1, 2))])
    assert jury_stable_interval(s).status is Status.UNKNOWN
    # Leading coefficient through zero.
    s2 = IntervalPoly([RationalInterval(-1, 1), RationalInterval(2, 2)])
    assert jury_stable_interval(s2).status is Status.UNKNOWN


def test_interval_soundness_sample():
    """Interval-Stable implies every sampled member is oracle-stable."""
    rng = random.Random(9)
    stable_families = 0
    for _ in range(400):
        p = _random_poly(rng, max_degree=3)
        delta = Fraction(rng.randint(0, 50), 1000)
        coeffs = [RationalInterval(c - delta, c + delta) for c in p.coeffs]
        v = jury_stable_interval(IntervalPoly(coeffs))
        if v.status is not Status.STABLE:
            continue
        stable_families += 1
        for _ in range(20):
            member = Poly([iv.lo + Fraction(rng.randint(0, 100), 100)
                           * iv.width for iv in coeffs])
            assert root_oracle(member) < 1.0
    assert stable_families > 5


def test_root_oracle():
    assert root_oracle(Poly([1, 0, Fraction(-1, 4)])) == pytest.approx(0.5)
    with pytest.raises(ValueError):
        root_oracle(Poly([1]))
