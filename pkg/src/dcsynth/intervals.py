"""Interval arithmetic with exact rational endpoints.

Endpoints are `Fraction`s, so every operation encloses its exact result set
with no rounding at all; outward rounding only enters when endpoints are
snapped to a dyadic grid (lo floors, hi ceils).
"""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction

from .errors import DivisorContainsZero
from .fixedpoint import FixedPointFormat
from .transfer import PlantFamily


@dataclass(frozen=True)
class RationalInterval:
    lo: Fraction
    hi: Fraction

    def __init__(self, lo, hi=None):
        lo = Fraction(lo)
        hi = lo if hi is None else Fraction(hi)
        if lo > hi:
            raise ValueError(f"interval endpoints out of order: [{lo}, {hi}]")
        object.__setattr__(self, "lo", lo)
        object.__setattr__(self, "hi", hi)

    @classmethod
    def point(cls, x) -> "RationalInterval":
        return cls(x, x)

    def contains(self, x) -> bool:
        return self.lo <= x <= self.hi

    def contains_zero(self) -> bool:
        return self.lo <= 0 <= self.hi

    def is_point(self) -> bool:
        return self.lo == self.hi

    @property
    def width(self) -> Fraction:
        return self.hi - self.lo

    @property
    def midpoint(self) -> Fraction:
        return (self.lo + self.hi) / 2

    def __neg__(self):
        return RationalInterval(-self.hi, -self.lo)

    def abs(self) -> "RationalInterval":
        if self.contains_zero():
            return RationalInterval(0, max(-self.lo, self.hi))
        if self.hi < 0:
            return -self
        return self

    def subset_of(self, other: "RationalInterval") -> bool:
        return other.lo <= self.lo and self.hi <= other.hi

    def snap_outward(self, fmt: FixedPointFormat) -> "RationalInterval":
        """Smallest grid-endpoint interval containing self (lo floors, hi ceils)."""
        s = fmt.scale
        import math
        return RationalInterval(Fraction(math.floor(self.lo * s), s),
                                Fraction(math.ceil(self.hi * s), s))

    def snap_inward(self, fmt: FixedPointFormat) -> "RationalInterval | None":
        """Largest grid-endpoint interval inside self, or None if no grid
        point lies inside."""
        s = fmt.scale
        import math
        lo = Fraction(math.ceil(self.lo * s), s)
        hi = Fraction(math.floor(self.hi * s), s)
        if lo > hi:
            return None
        return RationalInterval(lo, hi)


def iv_add(a: RationalInterval, b: RationalInterval) -> RationalInterval:
    return RationalInterval(a.lo + b.lo, a.hi + b.hi)


def iv_sub(a: RationalInterval, b: RationalInterval) -> RationalInterval:
    return RationalInterval(a.lo - b.hi, a.hi - b.lo)


def iv_mul(a: RationalInterval, b: RationalInterval) -> RationalInterval:
    p = (a.lo * b.lo, a.lo * b.hi, a.hi * b.lo, a.hi * b.hi)
    return RationalInterval(min(p), max(p))


def iv_div(a: RationalInterval, b: RationalInterval) -> RationalInterval:
    if b.contains_zero():
        raise DivisorContainsZero(f"divisor [{b.lo}, {b.hi}] contains zero")
    p = (a.lo / b.lo, a.lo / b.hi, a.hi / b.lo, a.hi / b.hi)
    return RationalInterval(min(p), max(p))


@dataclass(frozen=True)
class IntervalPoly:
    """Polynomial with interval coefficients, descending powers of z."""

    coeffs: tuple

    def __init__(self, coeffs):
        coeffs = tuple(c if isinstance(c, RationalInterval)
                       else RationalInterval.point(c) for c in coeffs)
        if not coeffs:
            raise ValueError("interval polynomial needs at least one coefficient")
        object.__setattr__(self, "coeffs", coeffs)

    @property
    def degree(self) -> int:
        return len(self.coeffs) - 1

    @classmethod
    def from_exact(cls, coeffs) -> "IntervalPoly":
        return cls([RationalInterval.point(c) for c in coeffs])

    def sample(self, picker) -> list:
        """Concrete coefficient list with picker(interval) choosing members."""
        return [picker(c) for c in self.coeffs]


def ipoly_add(a: IntervalPoly, b: IntervalPoly) -> IntervalPoly:
    n = max(len(a.coeffs), len(b.coeffs))
    zero = RationalInterval.point(0)
    ca = (zero,) * (n - len(a.coeffs)) + a.coeffs
    cb = (zero,) * (n - len(b.coeffs)) + b.coeffs
    return IntervalPoly([iv_add(x, y) for x, y in zip(ca, cb)])


def ipoly_mul(a: IntervalPoly, b: IntervalPoly) -> IntervalPoly:
    zero = RationalInterval.point(0)
    out = [zero] * (len(a.coeffs) + len(b.coeffs) - 1)
    for i, x in enumerate(a.coeffs):
        for j, y in enumerate(b.coeffs):
            out[i + j] = iv_add(out[i + j], iv_mul(x, y))
    return IntervalPoly(out)


def _coeff_interval(c: Fraction, delta: Fraction,
                    fmt: FixedPointFormat | None) -> RationalInterval:
    # Conservative symmetric enclosure: the FWL rounding residue has unknown
    # sign, so the grid term 2^-Fp widens both sides.
    grid = fmt.step if fmt is not None else Fraction(0)
    return RationalInterval(c - delta - grid, c + delta + grid)


def family_to_interval_poly(family: PlantFamily):
    """Interval numerator/denominator enclosing every plant of the family,
    including every FWL-quantized member at the family's plant format."""
    fmt = family.plant_format
    num = IntervalPoly([_coeff_interval(c, d, fmt)
                        for c, d in zip(family.nominal.num.coeffs, family.delta_num)])
    den = IntervalPoly([_coeff_interval(c, d, fmt)
                        for c, d in zip(family.nominal.den.coeffs, family.delta_den)])
    return num, den


def family_grid_box(family: PlantFamily):
    """Representable-plant box: the uncertainty box snapped inward onto the
    plant grid (no FWL inflation).  This is the fast stage's search space;
    empty-per-coefficient boxes collapse to the nearest grid point."""
    from .fixedpoint import quantize_nearest

    fmt = family.plant_format

    def snap(c, d):
        iv = RationalInterval(c - d, c + d)
        if fmt is None:
            return iv
        inner = iv.snap_inward(fmt)
        if inner is None:
            g = quantize_nearest(c, fmt).value
            return RationalInterval.point(g)
        return inner

    num = IntervalPoly([snap(c, d) for c, d in
                        zip(family.nominal.num.coeffs, family.delta_num)])
    den = IntervalPoly([snap(c, d) for c, d in
                        zip(family.nominal.den.coeffs, family.delta_den)])
    return num, den
