"""Synthesis orchestrator: inductive candidate search against a counterexample
set, two-stage verification (uncertainty box, then interval precision check),
and plant-precision escalation; plus the slower sound one-stage engine.

The candidate search is deterministic seeded hill climbing over the <I,F>
coefficient grid with randomized restarts, falling back to exhaustive
enumeration when the grid is small enough to sweep.
"""

from __future__ import annotations

import itertools
import random
import time
from dataclasses import dataclass, field
from fractions import Fraction

from .errors import (CounterexampleExtractionFailed, DegenerateCharPoly,
                     NoCandidate, Overflow)
from .fixedpoint import FixedPointFormat, FixedPointValue, quantize_truncate
from .intervals import (IntervalPoly, RationalInterval, family_grid_box,
                        family_to_interval_poly, ipoly_add, ipoly_mul)
from .stability import JuryVerdict, Status, jury_stable, jury_stable_interval
from .transfer import Controller, PlantFamily, Poly, TransferFunction, char_poly

DEFAULT_PLANT_FORMAT = FixedPointFormat(16, 24)
PRECISION_STEP = (4, 4)
PRECISION_CAP = FixedPointFormat(32, 32)
EXHAUSTIVE_LIMIT = 1 << 20
SUBDIVISION_DEPTH = 8

_BIG_PENALTY = Fraction(10 ** 6)


@dataclass
class Limits:
    max_iterations: int = 64
    max_precision: FixedPointFormat = PRECISION_CAP
    timeout_s: float = 600.0
    synth_budget: int = 60000


@dataclass
class CegisState:
    inputs: list
    candidate: Controller | None
    plant_format: FixedPointFormat
    iteration: int
    seed: int


@dataclass
class SynthesisResult:
    success: bool
    controller: Controller | None
    plant_format: FixedPointFormat | None
    iterations: int
    wall_time_s: float
    reason: str | None
    certificate: JuryVerdict | None
    transcript: list = field(default_factory=list)


def _zero_controller(fmt: FixedPointFormat, orders) -> Controller:
    z = FixedPointValue(0, fmt)
    return Controller([z] * (orders[0] + 1), [z] * (orders[1] + 1))


def _controller_from_raws(raws, fmt: FixedPointFormat, orders) -> Controller:
    m = orders[0] + 1
    return Controller([FixedPointValue(r, fmt) for r in raws[:m]],
                      [FixedPointValue(r, fmt) for r in raws[m:]])


def concrete_verdict(candidate: Controller, plant: TransferFunction,
                     fast_format: FixedPointFormat | None = None) -> JuryVerdict:
    """Jury verdict of the closed loop; a degenerate S counts as unstable."""
    try:
        s = char_poly(candidate, plant, fast_format=fast_format)
    except (DegenerateCharPoly, Overflow):
        return JuryVerdict(Status.UNSTABLE, None, -_BIG_PENALTY)
    v = jury_stable(s)
    if v.status is Status.UNKNOWN:
        # Singular table: conservatively unstable for synthesis purposes.
        return JuryVerdict(Status.UNSTABLE, v.violated, min(v.margin, Fraction(0)))
    return v


def _grid_search(n_coeffs, fmt, seed, budget, evaluate, num_len,
                 deadline=None):
    """Deterministic seeded hill climbing with restarts over raw-integer
    coordinates; returns an accepted raw vector or raises NoCandidate.

    evaluate(raws) -> (accepted, cost); cost 0.0 only for accepted points.
    The denominator leading raw (index num_len) is kept nonzero.
    """
    rng = random.Random(seed)
    limit = fmt.raw_limit
    evals = 0

    def spent():
        return evals >= budget or (deadline is not None
                                   and evals % 256 == 0
                                   and time.perf_counter() > deadline)

    def run(raws):
        nonlocal evals
        evals += 1
        return evaluate(tuple(raws))

    one = fmt.scale  # raw for value 1.0
    start_pool = _start_pool(rng, n_coeffs, num_len, limit, one)
    best_overall = None
    for raws in start_pool:
        if spent():
            break
        accepted, cost = run(raws)
        if accepted:
            return tuple(raws)
        step = max(1, limit >> 2)
        while step >= 1 and not spent():
            improved = False
            for i in range(n_coeffs):
                for delta in (step, -step):
                    if spent():
                        break
                    cand = list(raws)
                    cand[i] += delta
                    if abs(cand[i]) >= limit:
                        continue
                    if i == num_len and cand[i] == 0:
                        continue
                    a, c = run(cand)
                    if a:
                        return tuple(cand)
                    if c < cost:
                        raws, cost = cand, c
                        improved = True
                        break
            if not improved:
                step >>= 1
        if best_overall is None or cost < best_overall:
            best_overall = cost

    # Exhaustive sweep is feasible only for tiny grids; it turns a failed
    # search into a proof that no candidate exists.
    span = 2 * limit - 1
    if span ** n_coeffs <= EXHAUSTIVE_LIMIT:
        values = range(-limit + 1, limit)
        for raws in itertools.product(values, repeat=n_coeffs):
            if raws[num_len] == 0:
                continue
            accepted, _ = evaluate(raws)
            if accepted:
                return raws
    raise NoCandidate(f"search budget of {budget} evaluations exhausted")


def _start_pool(rng, n_coeffs, num_len, limit, one):
    """Deterministic sequence of restart points (generator, budget-bounded)."""
    # Probe the origin first, then seeded random restarts at varied
    # magnitudes.
    yield [0] * n_coeffs
    while True:
        scale_bits = rng.choice((1, 2, 4))
        hi = max(2, limit // scale_bits)
        raws = [rng.randrange(-hi + 1, hi) for _ in range(n_coeffs)]
        if raws[num_len] == 0:
            raws[num_len] = one if one < limit else 1
        yield raws


def synthesize_candidate(inputs, controller_format: FixedPointFormat, orders,
                         seed: int, budget: int,
                         plant_format: FixedPointFormat | None = None,
                         deadline=None) -> Controller:
    """Find a controller that is Jury-stable against every plant in `inputs`
    (fast fixed-point path when `plant_format` is given)."""
    if orders[0] < 0 or orders[1] < 0:
        raise ValueError("controller orders must be >= 0")
    if budget <= 0:
        raise ValueError("budget must be > 0")
    if not inputs:
        # Vacuously accepted first probe; rejected by verification next.
        return _zero_controller(controller_format, orders)

    n_coeffs = orders[0] + orders[1] + 2
    m = orders[0] + 1

    # Float images of the (grid-snapped) plant coefficients guide the search;
    # a candidate is only accepted after exact fixed-point confirmation.
    plant_floats = []
    for plant in inputs:
        if plant_format is not None:
            try:
                gn = [float(quantize_truncate(c, plant_format).value)
                      for c in plant.num.coeffs]
                gd = [float(quantize_truncate(c, plant_format).value)
                      for c in plant.den.coeffs]
            except Overflow:
                gn = [float(c) for c in plant.num.coeffs]
                gd = [float(c) for c in plant.den.coeffs]
        else:
            gn = [float(c) for c in plant.num.coeffs]
            gd = [float(c) for c in plant.den.coeffs]
        plant_floats.append((gn, gd))
    step = float(controller_format.step)

    def evaluate(raws):
        if raws[m] == 0:
            return False, float(_BIG_PENALTY) * len(inputs)
        cn = [r * step for r in raws[:m]]
        cd = [r * step for r in raws[m:]]
        cost = 0.0
        for gn, gd in plant_floats:
            margin = _float_jury_margin(_float_char(cn, gn, cd, gd))
            if margin <= 0.0:
                cost += -margin + 1e-9
        if cost > 0.0:
            return False, cost
        cand = _controller_from_raws(raws, controller_format, orders)
        for plant in inputs:
            v = concrete_verdict(cand, plant, fast_format=plant_format)
            if v.margin <= 0:
                return False, float(-v.margin) + 1e-9
        return True, 0.0

    raws = _grid_search(n_coeffs, controller_format, seed, budget, evaluate,
                        orders[0] + 1, deadline=deadline)
    return _controller_from_raws(raws, controller_format, orders)


def _float_char(cn, gn, cd, gd):
    """Float characteristic polynomial cn*gn + cd*gd (descending)."""
    a = [0.0] * (len(cn) + len(gn) - 1)
    for i, x in enumerate(cn):
        for j, y in enumerate(gn):
            a[i + j] += x * y
    b = [0.0] * (len(cd) + len(gd) - 1)
    for i, x in enumerate(cd):
        for j, y in enumerate(gd):
            b[i + j] += x * y
    n = max(len(a), len(b))
    a = [0.0] * (n - len(a)) + a
    b = [0.0] * (n - len(b)) + b
    return [x + y for x, y in zip(a, b)]


def _float_jury_margin(c) -> float:
    """Min slack of the stability conditions in float arithmetic (search
    guidance only; never a verdict)."""
    i = 0
    while i < len(c) - 1 and c[i] == 0.0:
        i += 1
    c = c[i:]
    if c[0] == 0.0:
        return -float(_BIG_PENALTY)
    if c[0] < 0:
        c = [-x for x in c]
    if len(c) == 1:
        return c[0]
    margin = sum(c)
    margin = min(margin,
                 sum(x if k % 2 == 0 else -x for k, x in enumerate(c)))
    margin = min(margin, abs(c[0]) - abs(c[-1]))
    row = c
    while len(row) > 2:
        if row[0] == 0.0:
            return min(margin, 0.0)
        alpha = row[-1] / row[0]
        row = [row[k] - alpha * row[len(row) - 1 - k]
               for k in range(len(row) - 1)]
        margin = min(margin, row[0])
    return margin


def _interval_char_poly(candidate: Controller, num_iv: IntervalPoly,
                        den_iv: IntervalPoly) -> IntervalPoly:
    cn = IntervalPoly.from_exact([v.value for v in candidate.num])
    cd = IntervalPoly.from_exact([v.value for v in candidate.den])
    return ipoly_add(ipoly_mul(cn, num_iv), ipoly_mul(cd, den_iv))


def _box_vertices(num_iv, den_iv):
    axes = [(c.lo, c.hi) if not c.is_point() else (c.lo,)
            for c in num_iv.coeffs + den_iv.coeffs]
    nn = len(num_iv.coeffs)
    for combo in itertools.product(*axes):
        yield combo[:nn], combo[nn:]


def _make_plant(num_coeffs, den_coeffs) -> TransferFunction | None:
    if all(c == 0 for c in den_coeffs):
        return None
    return TransferFunction(Poly(num_coeffs), Poly(den_coeffs))


def verify_uncertainty(candidate: Controller, family: PlantFamily,
                       descent_steps: int = 64):
    """First (fast) verification stage over the representable-plant box.

    Returns None when the stage finds the closed loop stable for the whole
    box, else a concrete counterexample plant (grid member, certified
    unstable).  Raises CounterexampleExtractionFailed when the interval
    verdict is inconclusive but no witness can be located.
    """
    num_iv, den_iv = family_grid_box(family)
    s_iv = _interval_char_poly(candidate, num_iv, den_iv)
    verdict = jury_stable_interval(s_iv)
    if verdict.status is Status.STABLE:
        return None

    witness = _extract_counterexample(candidate, family, num_iv, den_iv,
                                      descent_steps)
    if witness is not None:
        return witness

    # Completeness backstop: subdivide the box; all-stable leaves mean the
    # top-level verdict was merely conservative.
    outcome = _subdivide(candidate, family, num_iv, den_iv, SUBDIVISION_DEPTH)
    if outcome == "stable":
        return None
    if isinstance(outcome, TransferFunction):
        return outcome
    raise CounterexampleExtractionFailed(
        "interval verdict inconclusive and no unstable grid plant found")


def _extract_counterexample(candidate, family, num_iv, den_iv, descent_steps):
    fmt = family.plant_format
    worst = None  # (margin, num, den)
    for num_c, den_c in _box_vertices(num_iv, den_iv):
        plant = _make_plant(num_c, den_c)
        if plant is None:
            continue
        v = concrete_verdict(candidate, plant)
        if v.status is Status.UNSTABLE:
            return plant
        if worst is None or v.margin < worst[0]:
            worst = (v.margin, list(num_c), list(den_c))
    if worst is None:
        return None

    # Coordinate descent on the Jury margin from the worst vertex.
    _, num_c, den_c = worst
    coeffs = num_c + den_c
    boxes = list(num_iv.coeffs) + list(den_iv.coeffs)
    nn = len(num_c)
    margin = worst[0]
    step_unit = fmt.step if fmt is not None else None
    for _ in range(descent_steps):
        improved = False
        for i, box in enumerate(boxes):
            if box.is_point():
                continue
            base_step = step_unit if step_unit is not None else box.width / 16
            for mult in (1024, 64, 8, 1):
                delta = base_step * mult
                for sign in (1, -1):
                    trial = coeffs[i] + sign * delta
                    if not box.contains(trial):
                        continue
                    coeffs[i] = trial
                    plant = _make_plant(coeffs[:nn], coeffs[nn:])
                    if plant is None:
                        coeffs[i] = trial - sign * delta
                        continue
                    v = concrete_verdict(candidate, plant)
                    if v.status is Status.UNSTABLE:
                        return plant
                    if v.margin < margin:
                        margin = v.margin
                        improved = True
                        break
                    coeffs[i] = trial - sign * delta
                else:
                    continue
                break
        if not improved:
            break
    return None


def _subdivide(candidate, family, num_iv, den_iv, depth):
    """Interval-Jury over recursively split boxes.  Returns 'stable', an
    unstable witness plant, or 'unknown'."""
    s_iv = _interval_char_poly(candidate, num_iv, den_iv)
    verdict = jury_stable_interval(s_iv)
    if verdict.status is Status.STABLE:
        return "stable"
    if verdict.status is Status.UNSTABLE:
        witness = _grid_member(family, num_iv, den_iv)
        if witness is not None:
            return witness
        return "unknown"
    if depth == 0:
        return "unknown"
    boxes = list(num_iv.coeffs) + list(den_iv.coeffs)
    widths = [b.width for b in boxes]
    i = widths.index(max(widths))
    if widths[i] == 0:
        return "unknown"
    mid = boxes[i].midpoint
    results = []
    for half in (RationalInterval(boxes[i].lo, mid),
                 RationalInterval(mid, boxes[i].hi)):
        split = list(boxes)
        split[i] = half
        nn = len(num_iv.coeffs)
        sub = _subdivide(candidate, family, IntervalPoly(split[:nn]),
                         IntervalPoly(split[nn:]), depth - 1)
        if isinstance(sub, TransferFunction):
            return sub
        results.append(sub)
    if all(r == "stable" for r in results):
        return "stable"
    return "unknown"


def _grid_member(family, num_iv, den_iv):
    fmt = family.plant_format

    def pick(box):
        if fmt is None:
            return box.midpoint
        inner = box.snap_inward(fmt)
        return inner.midpoint if inner is not None else None

    num = [pick(b) for b in num_iv.coeffs]
    den = [pick(b) for b in den_iv.coeffs]
    if any(c is None for c in num + den):
        return None
    return _make_plant(num, den)


def verify_precision(candidate: Controller, family: PlantFamily):
    """Second (sound) stage: exact-rational interval Jury over the fully
    inflated family.  Returns the interval verdict."""
    num_iv, den_iv = family_to_interval_poly(family)
    s_iv = _interval_char_poly(candidate, num_iv, den_iv)
    return jury_stable_interval(s_iv)


def _describe_controller(c: Controller | None):
    if c is None:
        return None
    return {"num": [v.decimal_str() for v in c.num],
            "den": [v.decimal_str() for v in c.den],
            "num_raw": [v.raw for v in c.num],
            "den_raw": [v.raw for v in c.den],
            "format": str(c.format)}


def _describe_plant(p: TransferFunction):
    return {"num": [str(c) for c in p.num.coeffs],
            "den": [str(c) for c in p.den.coeffs]}


def cegis_two_stage(family: PlantFamily, controller_format: FixedPointFormat,
                    orders, seed: int, limits: Limits | None = None) -> SynthesisResult:
    """Fig-4-style loop: synthesize -> uncertainty check -> precision check,
    escalating the plant precision (and dropping stale counterexamples)
    whenever the sound stage rejects."""
    limits = limits or Limits()
    start = time.perf_counter()
    deadline = start + limits.timeout_s
    fmt_p = family.plant_format or DEFAULT_PLANT_FORMAT
    state = CegisState(inputs=[], candidate=None, plant_format=fmt_p,
                       iteration=0, seed=seed)
    transcript = []

    def fail(reason):
        return SynthesisResult(False, state.candidate, state.plant_format,
                               state.iteration, time.perf_counter() - start,
                               reason, None, transcript)

    while True:
        if time.perf_counter() > deadline:
            return fail("timeout")
        if state.iteration >= limits.max_iterations:
            return fail("iteration-limit")
        state.iteration += 1
        fam = family.with_format(state.plant_format)
        try:
            state.candidate = synthesize_candidate(
                state.inputs, controller_format, orders,
                seed + state.iteration, limits.synth_budget,
                plant_format=state.plant_format, deadline=deadline)
        except NoCandidate:
            return fail("no-candidate")
        transcript.append({"phase": "synthesize", "iteration": state.iteration,
                           "candidate": _describe_controller(state.candidate),
                           "inputs": len(state.inputs)})
        try:
            cex = verify_uncertainty(state.candidate, fam)
        except CounterexampleExtractionFailed:
            return fail("counterexample-extraction-failed")
        if cex is not None:
            state.inputs.append(cex)
            transcript.append({"phase": "counterexample",
                               "iteration": state.iteration,
                               "plant": _describe_plant(cex)})
            continue
        transcript.append({"phase": "uncertainty-ok",
                           "iteration": state.iteration})
        verdict = verify_precision(state.candidate, fam)
        if verdict.status is Status.STABLE:
            transcript.append({"phase": "precision-ok",
                               "iteration": state.iteration,
                               "plant_format": str(state.plant_format)})
            return SynthesisResult(True, state.candidate, state.plant_format,
                                   state.iteration,
                                   time.perf_counter() - start, None,
                                   verdict, transcript)
        next_fmt = FixedPointFormat(
            state.plant_format.integer_bits + PRECISION_STEP[0],
            state.plant_format.fraction_bits + PRECISION_STEP[1])
        transcript.append({"phase": "increase-precision",
                           "iteration": state.iteration,
                           "plant_format": str(next_fmt)})
        if (next_fmt.integer_bits > limits.max_precision.integer_bits
                or next_fmt.fraction_bits > limits.max_precision.fraction_bits):
            return fail("precision-limit")
        state.plant_format = next_fmt
        state.inputs.clear()  # stale: they were found at lower precision


def cegis_one_stage(family: PlantFamily, controller_format: FixedPointFormat,
                    orders, seed: int, limits: Limits | None = None) -> SynthesisResult:
    """Sound single-stage engine: search directly against the interval Jury
    test over the fully inflated family; no counterexample set."""
    limits = limits or Limits()
    start = time.perf_counter()
    deadline = start + limits.timeout_s
    fmt_p = family.plant_format or DEFAULT_PLANT_FORMAT
    fam = family.with_format(fmt_p)
    num_iv, den_iv = family_to_interval_poly(fam)
    transcript = []

    if time.perf_counter() > deadline:
        return SynthesisResult(False, None, fmt_p, 0,
                               time.perf_counter() - start, "timeout", None,
                               transcript)

    n_coeffs = orders[0] + orders[1] + 2

    def evaluate(raws):
        if raws[orders[0] + 1] == 0:
            return False, float(_BIG_PENALTY)
        cand = _controller_from_raws(raws, controller_format, orders)
        v = jury_stable_interval(_interval_char_poly(cand, num_iv, den_iv))
        if v.status is Status.STABLE:
            return True, 0.0
        return False, float(-min(v.margin, Fraction(0))) + 1e-9

    try:
        raws = _grid_search(n_coeffs, controller_format, seed + 1,
                            limits.synth_budget, evaluate, orders[0] + 1,
                            deadline=deadline)
    except NoCandidate:
        elapsed = time.perf_counter() - start
        reason = "timeout" if elapsed > limits.timeout_s else "no-candidate"
        return SynthesisResult(False, None, fmt_p, 1, elapsed, reason, None,
                               transcript)
    controller = _controller_from_raws(raws, controller_format, orders)
    verdict = jury_stable_interval(_interval_char_poly(controller, num_iv, den_iv))
    transcript.append({"phase": "one-stage-accept",
                       "candidate": _describe_controller(controller),
                       "plant_format": str(fmt_p)})
    return SynthesisResult(True, controller, fmt_p, 1,
                           time.perf_counter() - start, None, verdict,
                           transcript)
