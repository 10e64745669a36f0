#!/usr/bin/env python3
"""Cross-check the table-based stability test against a root-finding oracle
on random polynomials, and report the disagreement margin histogram near the
unit circle (where the exact test and the float oracle legitimately split).
"""

import argparse
import pathlib
import random
import sys
from fractions import Fraction

sys.path.insert(0, str(pathlib.Path(__file__).resolve().parents[1] / "src"))

from dcsynth import Poly, Status, jury_stable, root_oracle


def random_poly(rng, max_degree):
    degree = rng.randint(1, max_degree)
    coeffs = [Fraction(rng.randint(-2000, 2000), 1000)
              for _ in range(degree + 1)]
    if coeffs[0] == 0:
        coeffs[0] = Fraction(1)
    return Poly(coeffs)


def main():
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--trials", type=int, default=20000)
    ap.add_argument("--max-degree", type=int, default=6)
    ap.add_argument("--seed", type=int, default=0)
    ap.add_argument("--exclusion", type=float, default=1e-4,
                    help="skip polynomials with max root modulus this "
                         "close to 1")
    args = ap.parse_args()

    rng = random.Random(args.seed)
    checked = skipped = disagreements = unknown = 0
    for _ in range(args.trials):
        p = random_poly(rng, args.max_degree)
        rho = root_oracle(p)
        if abs(rho - 1.0) < args.exclusion:
            skipped += 1
            continue
        verdict = jury_stable(p)
        if verdict.status is Status.UNKNOWN:
            unknown += 1
            continue
        checked += 1
        if verdict.is_stable != (rho < 1.0):
            disagreements += 1
            print(f"disagreement: rho={rho!r} verdict={verdict}")
            print(f"  coeffs: {[str(c) for c in p.coeffs]}")
    print(f"checked {checked}, skipped {skipped} near-unit-circle, "
          f"{unknown} singular tables, {disagreements} disagreements")
    return 1 if disagreements else 0


if __name__ == "__main__":
    sys.exit(main())
