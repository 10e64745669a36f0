"""Command-line front end: synthesis and verification over benchmark files.

Exit codes: 0 for Success/Stable, 1 for Failure/Unstable, 2 for usage,
parse, or validation errors.
"""

from __future__ import annotations

import argparse
import json
import math
import sys
from fractions import Fraction

from .benchmark import BenchmarkSpec, parse_benchmark, parse_controller
from .cegis import Limits, cegis_one_stage, cegis_two_stage, verify_precision
from .errors import DcsynthError, ParseError, ValidationError
from .fixedpoint import FixedPointFormat, quantize_poly
from .simulate import NoiseModel, frequency_margins, step_response
from .stability import jury_stable, jury_stable_interval, root_oracle
from .transfer import (Controller, TransferFunction,
                       cancellation_on_or_outside_unit_circle, char_poly)

FORMAT_VERSION = 1


def _controller_report(controller: Controller | None):
    if controller is None:
        return None
    return {
        "num": [v.decimal_str() for v in controller.num],
        "den": [v.decimal_str() for v in controller.den],
        "num_raw": [v.raw for v in controller.num],
        "den_raw": [v.raw for v in controller.den],
        "format": str(controller.format),
    }


def _certificate_report(verdict):
    if verdict is None:
        return None
    return {
        "status": verdict.status.value,
        "violated": verdict.violated,
        "margin": str(verdict.margin),
    }


def _oracle_spot_check(controller: Controller, spec: BenchmarkSpec):
    s = char_poly(controller, spec.plant)
    return {
        "nominal_max_root_modulus": root_oracle(s) if s.degree >= 1 else 0.0,
        "cancellation_on_or_outside_unit_circle":
            cancellation_on_or_outside_unit_circle(controller, spec.plant),
    }


def run_synthesis(spec: BenchmarkSpec, engine: str, seed: int,
                  limits: Limits, with_timing: bool = True) -> dict:
    engines = {"two": cegis_two_stage, "one": cegis_one_stage}
    result = engines[engine](spec.family, spec.controller_format,
                             spec.controller_orders, seed, limits)
    report = {
        "format_version": FORMAT_VERSION,
        "command": "synth",
        "benchmark": spec.name,
        "engine": engine,
        "seed": seed,
        "outcome": "Success" if result.success else "Failure",
        "reason": result.reason,
        "controller": _controller_report(result.controller
                                         if result.success else None),
        "plant_format": str(result.plant_format),
        "iterations": result.iterations,
        "certificate": _certificate_report(result.certificate),
        "oracle": (_oracle_spot_check(result.controller, spec)
                   if result.success else None),
        "transcript": result.transcript,
    }
    if with_timing:
        report["wall_time_s"] = result.wall_time_s
    return report


def run_verify(spec: BenchmarkSpec, controller_coeffs, rounding: str,
               trace_out=None, steps: int = 1000, seed: int = 0) -> dict:
    num, den, file_fmt = controller_coeffs
    fmt = file_fmt or spec.controller_format
    controller = Controller(quantize_poly(num, fmt, rounding),
                            quantize_poly(den, fmt, rounding))
    s = char_poly(controller, spec.plant)
    verdict = jury_stable(s)
    sound = verify_precision(controller, spec.family)
    gm, pm = frequency_margins(controller, spec.plant,
                               spec.sample_time or Fraction(1))
    report = {
        "format_version": FORMAT_VERSION,
        "command": "verify",
        "benchmark": spec.name,
        "outcome": verdict.status.value,
        "controller": _controller_report(controller),
        "jury": _certificate_report(verdict),
        "interval_jury": _certificate_report(sound),
        "cancellation_on_or_outside_unit_circle":
            cancellation_on_or_outside_unit_circle(controller, spec.plant),
        "nominal_max_root_modulus":
            root_oracle(s) if s.degree >= 1 else 0.0,
        "gain_margin_db": "inf" if math.isinf(gm) else round(gm, 6),
        "phase_margin_deg": "inf" if math.isinf(pm) else round(pm, 6),
    }
    if trace_out is not None:
        q = controller.format.step
        trace = step_response(controller, spec.plant,
                              spec.sample_time or Fraction(1), steps,
                              NoiseModel.worst_case(q, q), seed,
                              stop_on_divergence=True)
        with open(trace_out, "w") as fh:
            trace.write_csv(fh)
        report["trace"] = {
            "path": str(trace_out),
            "steps": len(trace),
            "diverged": trace.diverged(),
        }
    return report


def _render_text(report: dict, indent: str = "", lines=None) -> str:
    top = lines is None
    lines = [] if top else lines
    for key, value in report.items():
        if isinstance(value, dict):
            lines.append(f"{indent}{key}:")
            _render_text(value, indent + "  ", lines)
        elif isinstance(value, list) and value and isinstance(value[0], dict):
            lines.append(f"{indent}{key}:")
            for item in value:
                lines.append(f"{indent}  -")
                _render_text(item, indent + "    ", lines)
        else:
            lines.append(f"{indent}{key}: {value}")
    return "\n".join(lines) if top else ""


def emit_report(report: dict, style: str, out=None):
    out = out or sys.stdout
    if style == "json":
        json.dump(report, out, indent=2, default=str)
        out.write("\n")
    else:
        out.write(_render_text(report))
        out.write("\n")


def _parse_format(text: str) -> FixedPointFormat:
    parts = text.split(",")
    if len(parts) != 2:
        raise argparse.ArgumentTypeError("expected I,F")
    try:
        return FixedPointFormat(int(parts[0]), int(parts[1]))
    except ValueError as exc:
        raise argparse.ArgumentTypeError(str(exc)) from None


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="dcsynth",
        description="Fixed-point controller synthesis and verification "
                    "for uncertain discrete plants.")
    sub = parser.add_subparsers(dest="command", required=True)

    def common(p):
        p.add_argument("file", help="benchmark file")
        p.add_argument("--seed", type=int, default=0)
        p.add_argument("--trace-out", metavar="PATH", default=None)
        p.add_argument("--rounding", choices=("truncate", "nearest"),
                       default="truncate")
        p.add_argument("--report", choices=("json", "text"), default="text")
        p.add_argument("--no-timing", action="store_true",
                       help="omit wall-clock fields (byte-identical reruns)")

    p_synth = sub.add_parser("synth", help="synthesize a controller")
    common(p_synth)
    p_synth.add_argument("--engine", choices=("two", "one"), default="two")
    p_synth.add_argument("--max-iters", type=int, default=64)
    p_synth.add_argument("--max-precision", type=_parse_format,
                         default=FixedPointFormat(32, 32), metavar="I,F")
    p_synth.add_argument("--timeout", type=float, default=600.0,
                         metavar="SECS")

    p_verify = sub.add_parser("verify", help="verify a given controller")
    common(p_verify)
    p_verify.add_argument("--controller", required=True, metavar="PATH",
                          help="controller coefficient file")
    p_verify.add_argument("--steps", type=int, default=1000,
                          help="trace length when --trace-out is given")
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        spec = parse_benchmark(args.file)
        if args.command == "synth":
            limits = Limits(max_iterations=args.max_iters,
                            max_precision=args.max_precision,
                            timeout_s=args.timeout)
            report = run_synthesis(spec, args.engine, args.seed, limits,
                                   with_timing=not args.no_timing)
            if args.trace_out and report["outcome"] == "Success":
                _emit_synth_trace(spec, report, args)
            emit_report(report, args.report)
            return 0 if report["outcome"] == "Success" else 1
        controller_coeffs = parse_controller(args.controller)
        report = run_verify(spec, controller_coeffs, args.rounding,
                            trace_out=args.trace_out, steps=args.steps,
                            seed=args.seed)
        emit_report(report, args.report)
        return 0 if report["outcome"] == "Stable" else 1
    except (ParseError, ValidationError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    except DcsynthError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1


def _emit_synth_trace(spec: BenchmarkSpec, report: dict, args):
    raws_n = report["controller"]["num_raw"]
    raws_d = report["controller"]["den_raw"]
    from .fixedpoint import FixedPointValue
    fmt = spec.controller_format
    controller = Controller([FixedPointValue(r, fmt) for r in raws_n],
                            [FixedPointValue(r, fmt) for r in raws_d])
    q = fmt.step
    trace = step_response(controller, spec.plant,
                          spec.sample_time or Fraction(1), 1000,
                          NoiseModel.worst_case(q, q), args.seed,
                          stop_on_divergence=True)
    with open(args.trace_out, "w") as fh:
        trace.write_csv(fh)
    report["trace"] = {"path": args.trace_out, "steps": len(trace),
                       "diverged": trace.diverged()}


if __name__ == "__main__":
    sys.exit(main())
