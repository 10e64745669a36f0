"""Polynomials and rational transfer functions in z, with exact coefficients.

Coefficients are stored in descending powers of z (index 0 = highest power).
Inputs written in ascending powers of z^-1 are converted at parse boundaries
only; see `from_zinv`.
"""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction

from .errors import DegenerateCharPoly, ImproperTransferFunction
from .fixedpoint import (FixedPointFormat, FixedPointValue, fp_add, fp_mul,
                         quantize_truncate)


def _frac_tuple(coeffs):
    return tuple(Fraction(c) for c in coeffs)


@dataclass(frozen=True)
class Poly:
    """Real polynomial, coefficients in descending powers of z."""

    coeffs: tuple

    def __init__(self, coeffs):
        coeffs = _frac_tuple(coeffs)
        if not coeffs:
            raise ValueError("polynomial needs at least one coefficient")
        object.__setattr__(self, "coeffs", coeffs)

    @property
    def degree(self) -> int:
        return len(self.coeffs) - 1

    def normalize(self) -> "Poly":
        """Strip leading zeros (keeping at least one coefficient)."""
        c = self.coeffs
        i = 0
        while i < len(c) - 1 and c[i] == 0:
            i += 1
        return Poly(c[i:])

    def is_zero(self) -> bool:
        return all(c == 0 for c in self.coeffs)

    def __call__(self, z):
        acc = 0
        for c in self.coeffs:
            acc = acc * z + c
        return acc

    def scale(self, k) -> "Poly":
        k = Fraction(k)
        return Poly([k * c for c in self.coeffs])


def poly_add(a: Poly, b: Poly) -> Poly:
    n = max(len(a.coeffs), len(b.coeffs))
    ca = (Fraction(0),) * (n - len(a.coeffs)) + a.coeffs
    cb = (Fraction(0),) * (n - len(b.coeffs)) + b.coeffs
    return Poly([x + y for x, y in zip(ca, cb)])


def poly_mul(a: Poly, b: Poly) -> Poly:
    out = [Fraction(0)] * (len(a.coeffs) + len(b.coeffs) - 1)
    for i, x in enumerate(a.coeffs):
        if x == 0:
            continue
        for j, y in enumerate(b.coeffs):
            out[i + j] += x * y
    return Poly(out)


@dataclass(frozen=True)
class TransferFunction:
    """Rational transfer function num/den in z (descending coefficients)."""

    num: Poly
    den: Poly

    def __init__(self, num, den, require_proper=False):
        num = num if isinstance(num, Poly) else Poly(num)
        den = den if isinstance(den, Poly) else Poly(den)
        num = num.normalize()
        den = den.normalize()
        if den.coeffs[0] == 0:
            raise ValueError("denominator is identically zero")
        if require_proper and num.degree > den.degree and not num.is_zero():
            raise ImproperTransferFunction(
                f"numerator degree {num.degree} > denominator degree {den.degree}")
        object.__setattr__(self, "num", num)
        object.__setattr__(self, "den", den)

    @classmethod
    def from_zinv(cls, num_zinv, den_zinv, **kw) -> "TransferFunction":
        """Build from coefficient lists in ascending powers of z^-1.

        (b0 + b1 z^-1 + ... + bM z^-M) / (a0 + ... + aN z^-N) is multiplied
        through by z^max(M,N) to reach descending-z form.
        """
        num = list(num_zinv)
        den = list(den_zinv)
        n = max(len(num), len(den))
        num = num + [0] * (n - len(num))
        den = den + [0] * (n - len(den))
        return cls(num, den, **kw)

    def __call__(self, z):
        return self.num(z) / self.den(z)


def pack_coefficients(tf: TransferFunction):
    """Flat vector [n_0 .. n_M d_0 .. d_N] of the normalized coefficients."""
    return list(tf.num.coeffs) + list(tf.den.coeffs)


def unpack_coefficients(vec, num_order: int, den_order: int) -> TransferFunction:
    if len(vec) != num_order + den_order + 2:
        raise ValueError("coefficient vector length does not match orders")
    return TransferFunction(vec[:num_order + 1], vec[num_order + 1:])


@dataclass(frozen=True)
class PlantFamily:
    """Uncertainty box around a nominal plant, plus the plant grid format.

    `delta_num`/`delta_den` are per-coefficient nonnegative magnitudes, one
    per normalized nominal coefficient.  `plant_format` of None means the
    plant coefficients are not snapped to any finite grid.
    """

    nominal: TransferFunction
    delta_num: tuple
    delta_den: tuple
    plant_format: FixedPointFormat | None = None

    def __init__(self, nominal, delta_num=None, delta_den=None, plant_format=None):
        m = nominal.num.degree
        n = nominal.den.degree
        delta_num = _frac_tuple(delta_num if delta_num is not None else [0] * (m + 1))
        delta_den = _frac_tuple(delta_den if delta_den is not None else [0] * (n + 1))
        if len(delta_num) != m + 1 or len(delta_den) != n + 1:
            raise ValueError("uncertainty vector length must match plant orders")
        if any(d < 0 for d in delta_num + delta_den):
            raise ValueError("uncertainty magnitudes must be nonnegative")
        object.__setattr__(self, "nominal", nominal)
        object.__setattr__(self, "delta_num", delta_num)
        object.__setattr__(self, "delta_den", delta_den)
        object.__setattr__(self, "plant_format", plant_format)

    def with_format(self, fmt: FixedPointFormat) -> "PlantFamily":
        return PlantFamily(self.nominal, self.delta_num, self.delta_den, fmt)

    def is_point(self) -> bool:
        return all(d == 0 for d in self.delta_num + self.delta_den)


@dataclass(frozen=True)
class Controller:
    """Digital controller with coefficients in one shared <I,F> format."""

    num: tuple
    den: tuple

    def __init__(self, num, den):
        num = tuple(num)
        den = tuple(den)
        if not num or not den:
            raise ValueError("controller needs numerator and denominator")
        fmts = {v.format for v in num + den}
        if len(fmts) != 1:
            raise ValueError("all controller coefficients must share one format")
        object.__setattr__(self, "num", num)
        object.__setattr__(self, "den", den)

    @property
    def format(self) -> FixedPointFormat:
        return self.num[0].format

    def as_transfer(self) -> TransferFunction:
        return TransferFunction([v.value for v in self.num],
                                [v.value for v in self.den])

    def coefficient_values(self):
        return [v.value for v in self.num] + [v.value for v in self.den]


def char_poly(controller: Controller, plant: TransferFunction,
              fast_format: FixedPointFormat | None = None) -> Poly:
    """Closed-loop characteristic polynomial S = Cn*Gn + Cd*Gd.

    With `fast_format` set, the plant is snapped to that grid and every
    product/sum is truncated back to it (the fast, potentially unsound path);
    otherwise the computation is exact.
    """
    if fast_format is None:
        # Built from raw coefficient values, not as_transfer(): the all-zero
        # candidate must reach the degeneracy check below, not fail earlier.
        cn = Poly([v.value for v in controller.num])
        cd = Poly([v.value for v in controller.den])
        s = poly_add(poly_mul(cn, plant.num), poly_mul(cd, plant.den))
    else:
        s = _char_poly_fixed(controller, plant, fast_format)
    s = s.normalize()
    if s.is_zero():
        raise DegenerateCharPoly("characteristic polynomial is identically zero")
    return s


def _char_poly_fixed(controller: Controller, plant: TransferFunction,
                     fmt: FixedPointFormat) -> Poly:
    def conv_fp(a, b):
        out = [FixedPointValue(0, fmt)] * (len(a) + len(b) - 1)
        for i, x in enumerate(a):
            for j, y in enumerate(b):
                out[i + j] = fp_add(out[i + j], fp_mul(x, y))
        return out

    def to_fmt(v):
        # Exact widening when possible, truncating re-quantization otherwise.
        if fmt.fraction_bits >= v.format.fraction_bits:
            return v.convert(fmt)
        return quantize_truncate(v.value, fmt)

    cn = [to_fmt(v) for v in controller.num]
    cd = [to_fmt(v) for v in controller.den]
    gn = [quantize_truncate(c, fmt) for c in plant.num.coeffs]
    gd = [quantize_truncate(c, fmt) for c in plant.den.coeffs]
    a = conv_fp(cn, gn)
    b = conv_fp(cd, gd)
    n = max(len(a), len(b))
    a = [FixedPointValue(0, fmt)] * (n - len(a)) + a
    b = [FixedPointValue(0, fmt)] * (n - len(b)) + b
    return Poly([fp_add(x, y).value for x, y in zip(a, b)])


def cancellation_on_or_outside_unit_circle(controller: Controller,
                                           plant: TransferFunction,
                                           tol: float = 1e-6) -> bool:
    """True iff the loop product C*G has a near-common numerator/denominator
    root pair with both moduli >= 1 - tol."""
    import numpy as np

    ctf = controller.as_transfer()
    loop_num = poly_mul(ctf.num, plant.num).normalize()
    loop_den = poly_mul(ctf.den, plant.den).normalize()
    if loop_num.degree < 1 or loop_den.degree < 1:
        return False
    zeros = np.roots([float(c) for c in loop_num.coeffs])
    poles = np.roots([float(c) for c in loop_den.coeffs])
    for zr in zeros:
        for pr in poles:
            if (abs(zr - pr) < tol
                    and abs(zr) >= 1 - tol and abs(pr) >= 1 - tol):
                return True
    return False
