#!/usr/bin/env python3
"""Wall-time comparison of the two-stage and one-stage engines.

The one-stage engine pays the sound interval check on every candidate it
looks at; the two-stage engine pays it once per CEGIS iteration and guides
the search with cheap fixed-point evaluations.  That asymmetry only shows
on instances where the search has to work: on a point family that any
feedback gain stabilizes, both engines finish within a few evaluations and
the two-stage loop's round-trip overhead dominates instead.
"""

import argparse
import pathlib
import statistics
import sys
import time

sys.path.insert(0, str(pathlib.Path(__file__).resolve().parents[1] / "src"))

from dcsynth import Limits, cegis_one_stage, cegis_two_stage, parse_benchmark

BENCH_DIR = pathlib.Path(__file__).resolve().parents[1] / "benchmarks"
BENCHES = ("cruise.bench", "cruise_gain_uncertain.bench")


def time_engine(engine, spec, seed, repeats):
    times, result = [], None
    for _ in range(repeats):
        t0 = time.perf_counter()
        result = engine(spec.family, spec.controller_format,
                        spec.controller_orders, seed, Limits())
        times.append(time.perf_counter() - t0)
    return statistics.median(times), result


def main():
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--seeds", type=int, nargs="+",
                    default=[1234, 7, 42, 99, 2024])
    ap.add_argument("--repeats", type=int, default=5)
    args = ap.parse_args()

    for bench in BENCHES:
        spec = parse_benchmark(BENCH_DIR / bench)
        print(f"== {spec.name} ==")
        print(f"{'seed':>6} {'two-stage':>12} {'one-stage':>12} "
              f"{'ratio':>7}  outcome")
        for seed in args.seeds:
            t2, r2 = time_engine(cegis_two_stage, spec, seed, args.repeats)
            t1, r1 = time_engine(cegis_one_stage, spec, seed, args.repeats)
            outcome = ("both ok" if r2.success and r1.success
                       else f"two={r2.reason} one={r1.reason}")
            print(f"{seed:>6} {t2 * 1e3:>10.2f}ms {t1 * 1e3:>10.2f}ms "
                  f"{t1 / t2:>7.2f}  {outcome}")
        print()


if __name__ == "__main__":
    main()
