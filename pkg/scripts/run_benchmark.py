#!/usr/bin/env python3
"""Time signature computation across bag sizes and print a CSV table.

Bags have uniform random 64-bit ids and Exponential(1) weights; timing
covers the signature call only.  ICWS cost grows linearly in n while the
heap-based variants stay near-flat once n exceeds m, so the table makes
the crossover visible.

Example:
    python scripts/run_benchmark.py --algos bmh2 icws --n 100 1000 10000
"""

import argparse
import sys

from bagminhash.cli import DEFAULT_GRID_SPEC, _parse_grid
from bagminhash.harness import BenchmarkReport, run_benchmark


def main() -> int:
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--algos", nargs="+", default=["bmh1", "bmh2", "icws"],
                    choices=["naive", "enhanced", "bmh1", "bmh2", "icws"])
    ap.add_argument("--m", type=int, default=256)
    ap.add_argument("--n", nargs="+", type=int,
                    default=[10, 100, 1000, 10000, 100000])
    ap.add_argument("--reps", type=int, default=5)
    ap.add_argument("--seed", type=int, default=42)
    ap.add_argument("--grid", default=DEFAULT_GRID_SPEC)
    ap.add_argument("--icws-cap", type=int, default=200000,
                    help="skip icws above this n instead of extrapolating")
    args = ap.parse_args()

    grid = _parse_grid(args.grid)
    print(BenchmarkReport.csv_header())
    for n in args.n:
        for algo in args.algos:
            if algo == "icws" and n > args.icws_cap:
                continue
            report = run_benchmark(
                algo, args.m, n, args.reps, args.seed,
                grid=None if algo == "icws" else grid,
            )
            print(report.csv_row())
            sys.stdout.flush()
    return 0


if __name__ == "__main__":
    sys.exit(main())
