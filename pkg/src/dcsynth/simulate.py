"""Closed-loop simulation and frequency-domain margins.

The loop is the fully digital unity-negative-feedback arrangement: the
controller runs in its own fixed-point format (truncating arithmetic, wide
accumulator range), the plant runs in high-precision real arithmetic, and
quantization noise enters as nu1 at the plant output (ADC side) and nu2 at
the controller output (DAC side), each bounded by half a quantization step.
"""

from __future__ import annotations

import csv
import math
import random
from dataclasses import dataclass, field
from fractions import Fraction

import mpmath as mp
import numpy as np

from .errors import (ArithmeticOverflow, DegenerateLoop,
                     EvaluationSingularity, Overflow)
from .fixedpoint import (FixedPointFormat, FixedPointValue, fp_add, fp_div,
                         fp_mul, fp_sub)
from .transfer import Controller, Poly, TransferFunction, poly_add, poly_mul

SIGNAL_INTEGER_BITS = 40
DIVERGENCE_FACTOR = 10 ** 6
_PLANT_DPS = 50

NOISE_MODES = ("zero", "worst-case-bound", "seeded-uniform")


@dataclass(frozen=True)
class NoiseModel:
    """ADC/DAC quantization noise: |nu1| <= q1/2 at the plant output and
    |nu2| <= q2/2 at the controller output."""

    q1: Fraction
    q2: Fraction
    mode: str = "zero"

    def __post_init__(self):
        object.__setattr__(self, "q1", Fraction(self.q1))
        object.__setattr__(self, "q2", Fraction(self.q2))
        if self.q1 < 0 or self.q2 < 0:
            raise ValueError("quantization steps must be nonnegative")
        if self.mode not in NOISE_MODES:
            raise ValueError(f"unknown noise mode {self.mode!r}")

    @classmethod
    def zero(cls) -> "NoiseModel":
        return cls(Fraction(0), Fraction(0), "zero")

    @classmethod
    def worst_case(cls, q1, q2) -> "NoiseModel":
        return cls(q1, q2, "worst-case-bound")

    @classmethod
    def seeded_uniform(cls, q1, q2) -> "NoiseModel":
        return cls(q1, q2, "seeded-uniform")


@dataclass
class SimulationTrace:
    """Time-indexed (r, e, u, y) samples; e and u live on the controller
    signal grid (FixedPointValue), r and y are exact rationals."""

    sample_time: Fraction
    r: list = field(default_factory=list)
    e: list = field(default_factory=list)
    u: list = field(default_factory=list)
    y: list = field(default_factory=list)

    def __len__(self):
        return len(self.y)

    def max_abs_output(self) -> Fraction:
        return max((abs(v) for v in self.y), default=Fraction(0))

    def diverged(self, reference_level=Fraction(1)) -> bool:
        return self.max_abs_output() > DIVERGENCE_FACTOR * abs(reference_level)

    def divergence_step(self, reference_level=Fraction(1)):
        bound = DIVERGENCE_FACTOR * abs(reference_level)
        for k, v in enumerate(self.y):
            if abs(v) > bound:
                return k
        return None

    def write_csv(self, fp):
        writer = csv.writer(fp, lineterminator="\n")
        writer.writerow(["k", "t", "r", "e", "u", "y"])
        t = Fraction(0)
        for k in range(len(self.y)):
            # e and u are controller-path signals: bit-exact decimals.
            # y is the real-valued plant output: shortest float round-trip.
            writer.writerow([k, _decimal(t), _decimal(self.r[k]),
                             self.e[k].decimal_str(), self.u[k].decimal_str(),
                             repr(float(self.y[k]))])
            t += self.sample_time


def _decimal(x: Fraction, digits: int = 20) -> str:
    """Decimal rendering; exact when the denominator is 2^a 5^b, otherwise
    rounded to `digits` fractional digits."""
    x = Fraction(x)
    den = x.denominator
    twos = fives = 0
    while den % 2 == 0:
        den //= 2
        twos += 1
    while den % 5 == 0:
        den //= 5
        fives += 1
    if den == 1:
        k = max(twos, fives)
        scaled = abs(x.numerator) * 2 ** (k - twos) * 5 ** (k - fives)
        s = str(scaled).rjust(k + 1, "0")
        sign = "-" if x < 0 else ""
        return f"{sign}{s[:-k]}.{s[-k:]}" if k else f"{sign}{s}"
    scaled = round(x * 10 ** digits)
    s = str(abs(scaled)).rjust(digits + 1, "0")
    sign = "-" if scaled < 0 else ""
    return f"{sign}{s[:-digits]}.{s[-digits:]}"


def _controller_polys(controller):
    if isinstance(controller, Controller):
        return (Poly([v.value for v in controller.num]),
                Poly([v.value for v in controller.den]),
                controller.format)
    return controller.num, controller.den, None


def _pad_front(coeffs, n):
    return [Fraction(0)] * (n - len(coeffs)) + list(coeffs)


def _noise_stream(noise: NoiseModel, seed):
    """Returns nu(step, q, reference_signal) -> Fraction for one channel."""
    if noise.mode == "zero":
        return lambda q, ref: Fraction(0)
    if noise.mode == "worst-case-bound":
        # Adversarial: the contribution to the downstream signal has the same
        # sign as that signal, pushing it away from zero.
        def worst(q, ref):
            if ref == 0:
                return q / 2
            return (q if ref > 0 else -q) / 2
        return worst
    rng = random.Random(seed)

    def uniform(q, ref):
        if q == 0:
            return Fraction(0)
        return Fraction(rng.uniform(float(-q) / 2, float(q) / 2))
    return uniform


def step_response(controller, plant: TransferFunction, T, steps: int,
                  noise: NoiseModel | None = None, seed: int = 0,
                  reference=Fraction(1),
                  stop_on_divergence: bool = False) -> SimulationTrace:
    """Unity-negative-feedback step response.

    The controller path runs on the fixed-point signal grid <40, F> where F
    is the controller's fraction bit count (wide range, same resolution), so
    coefficient arithmetic truncates exactly as deployed code would while
    signal headroom failures still surface as ArithmeticOverflow.  The plant
    path runs in high-precision real arithmetic.

    With `stop_on_divergence` the loop ends early once |y| exceeds the
    divergence threshold; the trace is then shorter than `steps` (an unstable
    loop eventually overflows even the wide signal format, so this is how a
    divergent trace is inspected rather than raised out of).
    """
    if steps < 1:
        raise ValueError("steps must be >= 1")
    noise = noise or NoiseModel.zero()
    cn, cd, cfmt = _controller_polys(controller)
    sig_fmt = FixedPointFormat(
        SIGNAL_INTEGER_BITS,
        cfmt.fraction_bits if cfmt is not None else 16)
    n_c = max(len(cn.coeffs), len(cd.coeffs))
    b = _pad_front(cn.coeffs, n_c)
    a = _pad_front(cd.coeffs, n_c)
    controller_is_zero = all(c == 0 for c in b)
    bq = [_to_sig(c, sig_fmt) for c in b]
    aq = [_to_sig(c, sig_fmt) for c in a]

    gn_, gd_ = plant.num, plant.den
    n_g = max(len(gn_.coeffs), len(gd_.coeffs))
    nu1 = _noise_stream(noise, seed * 2 + 1)
    nu2 = _noise_stream(noise, seed * 2 + 2)
    reference = Fraction(reference)

    with mp.workdps(_PLANT_DPS):
        gn = [mp.mpf(c.numerator) / mp.mpf(c.denominator)
              for c in _pad_front(gn_.coeffs, n_g)]
        gd = [mp.mpf(c.numerator) / mp.mpf(c.denominator)
              for c in _pad_front(gd_.coeffs, n_g)]
        e_hist = [FixedPointValue(0, sig_fmt)] * n_c
        u_hist = [FixedPointValue(0, sig_fmt)] * n_c
        uin_hist = [mp.mpf(0)] * n_g
        y_hist = [mp.mpf(0)] * n_g
        trace = SimulationTrace(sample_time=Fraction(T))
        for k in range(steps):
            y = y_hist[0]
            y_fr = _mpf_to_fraction(y)
            e_pre = reference - y_fr
            e_meas = e_pre + nu1(noise.q1, e_pre)
            try:
                e_q = _quantize_sig(e_meas, sig_fmt)
                u_q = (FixedPointValue(0, sig_fmt) if controller_is_zero
                       else _controller_step(bq, aq, e_q, e_hist, u_hist,
                                             sig_fmt))
            except Overflow as exc:
                raise ArithmeticOverflow(k, str(exc)) from exc
            e_hist = [e_q] + e_hist[:-1]
            u_hist = [u_q] + u_hist[:-1]
            u_out = u_q.value + nu2(noise.q2, u_q.value)
            u_in = mp.mpf(u_out.numerator) / mp.mpf(u_out.denominator)
            y_next = _plant_step(gn, gd, u_in, uin_hist, y_hist)
            uin_hist = [u_in] + uin_hist[:-1]
            y_hist = [y_next] + y_hist[:-1]
            trace.r.append(reference)
            trace.e.append(e_q)
            trace.u.append(u_q)
            trace.y.append(y_fr)
            if (stop_on_divergence
                    and abs(y_fr) > DIVERGENCE_FACTOR * abs(reference)):
                break
    return trace


def _to_sig(c: Fraction, fmt: FixedPointFormat) -> FixedPointValue:
    raw = c * fmt.scale
    if raw.denominator != 1:
        # Plain-transfer-function controllers may carry off-grid decimals;
        # snap to the nearest grid value (fixed-point controllers are exact).
        raw = round(raw)
    return FixedPointValue(int(raw), fmt)


def _quantize_sig(x: Fraction, fmt: FixedPointFormat) -> FixedPointValue:
    raw = int(Fraction(x) * fmt.scale)  # truncation toward zero
    return FixedPointValue(raw, fmt)


def _controller_step(bq, aq, e_q, e_hist, u_hist, fmt):
    """Direct-form-I update a0*u[k] = sum b_j e[k-j] - sum_{j>=1} a_j u[k-j],
    every operation truncating on the signal grid."""
    acc = FixedPointValue(0, fmt)
    es = [e_q] + e_hist[:len(bq) - 1]
    for coeff, sig in zip(bq, es):
        acc = fp_add(acc, fp_mul(coeff, sig))
    for j in range(1, len(aq)):
        acc = fp_sub(acc, fp_mul(aq[j], u_hist[j - 1]))
    return fp_div(acc, aq[0])


def _plant_step(gn, gd, u_in, uin_hist, y_hist):
    us = [u_in] + uin_hist[:len(gn) - 1]
    acc = mp.mpf(0)
    for coeff, sig in zip(gn, us):
        acc += coeff * sig
    for j in range(1, len(gd)):
        acc -= gd[j] * y_hist[j - 1]
    return acc / gd[0]


def _mpf_to_fraction(x) -> Fraction:
    sign, man, exp, _ = mp.mpf(x)._mpf_
    if man == 0:
        return Fraction(0)
    return Fraction(-man if sign else man) * Fraction(2) ** exp


def _loop_response(controller, plant, omegas, T):
    cn, cd, _ = _controller_polys(controller)
    z = np.exp(1j * omegas * float(T))
    num = (np.polyval([float(c) for c in cn.coeffs], z)
           * np.polyval([float(c) for c in plant.num.coeffs], z))
    den = (np.polyval([float(c) for c in cd.coeffs], z)
           * np.polyval([float(c) for c in plant.den.coeffs], z))
    if np.any(den == 0) or not np.all(np.isfinite(den)):
        raise EvaluationSingularity("loop pole on the evaluation grid")
    return num / den


def frequency_margins(controller, plant: TransferFunction, T,
                      points: int = 20000):
    """(gain margin dB, phase margin degrees) of the open loop C*G.

    Standard crossover definitions on a log grid of `points` frequencies in
    (0, pi/T).  The Nyquist point z = -1 always counts as a gain-margin
    candidate; math.inf is returned for a margin with no crossover.
    """
    t = float(T)
    w_max = math.pi / t
    omegas = np.logspace(math.log10(w_max) - 6, math.log10(w_max), points,
                         endpoint=False)[1:]
    try:
        resp = _loop_response(controller, plant, omegas, T)
    except EvaluationSingularity:
        omegas = omegas * (1 + 1e-9)
        resp = _loop_response(controller, plant, omegas, T)

    mag = np.abs(resp)
    phase = np.unwrap(np.angle(resp))

    gm_candidates = []
    # Interior -180 degree crossings (phase through an odd multiple of pi).
    shifted = (phase + math.pi) / (2 * math.pi)
    wraps = np.floor(shifted)
    for i in np.nonzero(np.diff(wraps) != 0)[0]:
        # Linear interpolation of |L| at the crossing.
        p0, p1 = shifted[i], shifted[i + 1]
        target = max(wraps[i], wraps[i + 1])
        if p1 == p0:
            continue
        frac = (target - p0) / (p1 - p0)
        m = mag[i] + frac * (mag[i + 1] - mag[i])
        if m > 0:
            gm_candidates.append(-20 * math.log10(m))
    nyq = _loop_response(controller, plant, np.array([w_max]), T)
    m_nyq = abs(nyq[0])
    if m_nyq > 0:
        gm_candidates.append(-20 * math.log10(m_nyq))
    gain_margin = min(gm_candidates) if gm_candidates else math.inf

    pm_candidates = []
    above = mag >= 1.0
    for i in np.nonzero(np.diff(above))[0]:
        m0, m1 = mag[i], mag[i + 1]
        frac = (1.0 - m0) / (m1 - m0) if m1 != m0 else 0.5
        ph = phase[i] + frac * (phase[i + 1] - phase[i])
        pm_candidates.append(_wrap_margin(math.degrees(ph) + 180.0))
    if np.all(above) and abs(mag[0] - 1.0) < 1e-12:
        pm_candidates.append(_wrap_margin(math.degrees(phase[0]) + 180.0))
    phase_margin = min(pm_candidates) if pm_candidates else math.inf
    return gain_margin, phase_margin


def _wrap_margin(deg: float) -> float:
    """Reduce an angle in degrees to the representative in (-180, 180]."""
    m = deg % 360.0
    return m - 360.0 if m > 180.0 else m


def write_margins(fp, gain_margin_db, phase_margin_deg):
    """Key=value export of the margin pair."""
    def fmt(x):
        return "inf" if math.isinf(x) else f"{x:.6f}"
    fp.write(f"gain_margin_db = {fmt(gain_margin_db)}\n")
    fp.write(f"phase_margin_deg = {fmt(phase_margin_deg)}\n")


def sensitivity_functions(controller, plant: TransferFunction):
    """(H1, H2, H3) = (1, G, GC) / (1 + GC), all over the shared closed-loop
    denominator S = Cn*Gn + Cd*Gd."""
    cn, cd, _ = _controller_polys(controller)
    s = poly_add(poly_mul(cn, plant.num), poly_mul(cd, plant.den)).normalize()
    if s.is_zero():
        raise DegenerateLoop("1 + G*C is identically zero")
    h1 = TransferFunction(poly_mul(cd, plant.den), s)
    h2 = TransferFunction(poly_mul(cd, plant.num), s)
    h3 = TransferFunction(poly_mul(cn, plant.num), s)
    return h1, h2, h3
