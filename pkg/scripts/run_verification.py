#!/usr/bin/env python3
"""Sweep the statistical verification harness over algorithms and sizes.

Prints one CSV row per (algorithm, test case, m) cell with the empirical
MSE z-score.  Cells with |z| above the threshold are retried once with a
shifted seed before being flagged, mirroring how the acceptance checks
treat a single unlucky draw.

Example:
    python scripts/run_verification.py --n-examples 2000 --m 4 64
"""

import argparse
import sys

from bagminhash.discretization import binary_grid, geometric_grid
from bagminhash.harness import BINARY_CASE_NAMES, CANONICAL_TEST_CASES, run_verification

GEO_GRID = geometric_grid(1e-4, 0.01, 1391)


def cells(algos, ms):
    for algo in algos:
        for tc in CANONICAL_TEST_CASES:
            if algo == "enhanced":
                # enhanced iterates every grid level; keep it on the
                # two-level grid where that is cheap
                if tc.name not in BINARY_CASE_NAMES:
                    continue
                grid = binary_grid()
            elif algo == "icws":
                grid = None
            else:
                grid = GEO_GRID
            for m in ms:
                yield algo, tc, m, grid


def main() -> int:
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--algos", nargs="+",
                    default=["enhanced", "bmh1", "bmh2", "icws"],
                    choices=["naive", "enhanced", "bmh1", "bmh2", "icws"])
    ap.add_argument("--m", nargs="+", type=int, default=[4, 64, 256])
    ap.add_argument("--n-examples", type=int, default=10**4)
    ap.add_argument("--seed", type=int, default=20240817)
    ap.add_argument("--threshold", type=float, default=3.5)
    args = ap.parse_args()

    print("algo,case,m,jaccard,empirical_mse,expected_mse,z,retried,ok")
    failures = 0
    for algo, tc, m, grid in cells(args.algos, args.m):
        report = run_verification(algo, tc, m, args.n_examples, args.seed, grid=grid)
        retried = False
        if abs(report.z) > args.threshold:
            retried = True
            report = run_verification(algo, tc, m, args.n_examples, args.seed + 1, grid=grid)
        ok = abs(report.z) <= args.threshold
        failures += not ok
        print(f"{algo},{tc.name},{m},{report.jaccard:.6f},{report.empirical_mse:.6e},"
              f"{report.expected_mse:.6e},{report.z:+.3f},{int(retried)},{int(ok)}")
        sys.stdout.flush()
    if failures:
        print(f"{failures} cell(s) failed", file=sys.stderr)
    return 1 if failures else 0


if __name__ == "__main__":
    sys.exit(main())
