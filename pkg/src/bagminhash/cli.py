"""Command line interface.

Four subcommands: ``sign`` hashes a tab-separated (id, weight) file into a
signature file, ``estimate`` compares two signature files, ``verify`` runs
the z-score harness on a named test case, and ``bench`` times an algorithm
on random bags.  Every run is a pure function of its arguments (plus
``--seed`` where randomness is involved), so reruns reproduce their output
byte for byte; ``bench`` wall times are the one exception.
"""

from __future__ import annotations

import argparse
import json
import os
import sys

from .discretization import (
    WeightDiscretization,
    binary_grid,
    geometric_grid,
    single_precision_grid,
)
from .errors import BagMinHashError
from .estimation import estimate_jaccard
from .harness import (
    CASES_BY_NAME,
    TestCase,
    run_benchmark,
    run_verification,
    BenchmarkReport,
)
from .rng import RngConfig
from .serialization import (
    dump_signature,
    load_signature,
    signature_from_json,
    signature_to_json,
)
from .signatures import (
    WeightedBag,
    bagminhash1,
    bagminhash2,
    bbit_transform,
    enhanced_signature,
    icws_signature,
    naive_signature,
)

ALGORITHMS = ("naive", "enhanced", "bmh1", "bmh2", "icws")

# Covers weights in (1e-4, ~1e2] at 1% discretization error; small enough
# to keep split descents shallow.
DEFAULT_GRID_SPEC = "geometric:1e-4,0.01,1391"


def _parse_grid(spec: str) -> WeightDiscretization:
    if spec == "binary":
        return binary_grid()
    if spec == "f32":
        return single_precision_grid()
    if spec.startswith("geometric:"):
        parts = spec[len("geometric:"):].split(",")
        if len(parts) != 3:
            raise SystemExit(f"grid spec {spec!r}: expected geometric:v1,eps,K")
        try:
            return geometric_grid(float(parts[0]), float(parts[1]), int(parts[2]))
        except (ValueError, BagMinHashError) as exc:
            raise SystemExit(f"grid spec {spec!r}: {exc}") from exc
    raise SystemExit(f"unknown grid {spec!r}; use binary, f32, or geometric:v1,eps,K")


def _read_bag(path: str) -> WeightedBag:
    pairs = []
    with open(path, encoding="utf-8") as fh:
        for lineno, line in enumerate(fh, 1):
            line = line.rstrip("\n")
            if not line:
                continue
            ident, sep, weight = line.partition("\t")
            if not sep:
                raise SystemExit(f"{path}:{lineno}: expected <id>\\t<weight>, got {line!r}")
            try:
                d = int(ident, 16 if ident.lower().startswith("0x") else 10)
                w = float(weight)
            except ValueError as exc:
                raise SystemExit(f"{path}:{lineno}: {exc}") from exc
            pairs.append((d, w))
    try:
        return WeightedBag.from_pairs(pairs)
    except (ValueError, BagMinHashError) as exc:
        raise SystemExit(f"{path}: {exc}") from exc


def _load_signature_file(path: str):
    with open(path, "rb") as fh:
        head = fh.read(4)
    if head == b"BMH1":
        return load_signature(path)
    with open(path, encoding="utf-8") as fh:
        return signature_from_json(json.load(fh))


def _load_case(spec: str) -> TestCase:
    if spec in CASES_BY_NAME:
        return CASES_BY_NAME[spec]
    if os.path.exists(spec):
        with open(spec, encoding="utf-8") as fh:
            doc = json.load(fh)
        try:
            pairs = tuple((float(a), float(b)) for a, b in doc["weight_pairs"])
            return TestCase(doc.get("name", os.path.basename(spec)), pairs)
        except (KeyError, TypeError, ValueError) as exc:
            raise SystemExit(f"{spec}: not a test-case file: {exc}") from exc
    known = ", ".join(sorted(CASES_BY_NAME))
    raise SystemExit(f"unknown test case {spec!r}; known cases: {known}")


def _config(args: argparse.Namespace) -> RngConfig:
    return RngConfig(exp_sampler=args.exp_sampler)


def _add_common(p: argparse.ArgumentParser, *, grid_default: str | None) -> None:
    p.add_argument("--algo", required=True, choices=ALGORITHMS)
    p.add_argument("--m", required=True, type=int, help="signature components")
    p.add_argument(
        "--grid",
        default=grid_default,
        help="weight grid: binary, f32, or geometric:v1,eps,K (ignored for icws)",
    )
    p.add_argument(
        "--exp-sampler",
        default="ziggurat",
        choices=("ziggurat", "invcdf"),
        help="exponential sampling method (changes signature values)",
    )


def cmd_sign(args: argparse.Namespace) -> int:
    bag = _read_bag(args.input)
    config = _config(args)
    try:
        if args.algo == "icws":
            if args.b is not None:
                raise SystemExit("--b applies to the real-valued algorithms, not icws")
            sig = icws_signature(bag, args.m, config=config)
        else:
            if args.grid is None:
                raise SystemExit(f"{args.algo} needs --grid")
            fn = {
                "naive": naive_signature,
                "enhanced": enhanced_signature,
                "bmh1": bagminhash1,
                "bmh2": bagminhash2,
            }[args.algo]
            sig = fn(bag, _parse_grid(args.grid), args.m, config=config)
            if args.b is not None:
                sig = bbit_transform(sig, args.b)
    except (ValueError, BagMinHashError) as exc:
        raise SystemExit(str(exc)) from exc
    if args.format == "json":
        with open(args.output, "w", encoding="utf-8") as fh:
            json.dump(signature_to_json(sig), fh, sort_keys=True)
            fh.write("\n")
    else:
        dump_signature(sig, args.output)
    return 0


def cmd_estimate(args: argparse.Namespace) -> int:
    try:
        sig_a = _load_signature_file(args.a)
        sig_b = _load_signature_file(args.b)
        result = estimate_jaccard(sig_a, sig_b)
    except (ValueError, BagMinHashError) as exc:
        raise SystemExit(str(exc)) from exc
    out = {"matches": result.matches, "m": result.m, "estimate": result.estimate}
    if result.corrected_estimate is not None:
        out["corrected_estimate"] = result.corrected_estimate
    print(json.dumps(out, sort_keys=True))
    return 0


def cmd_verify(args: argparse.Namespace) -> int:
    tc = _load_case(args.case)
    grid = None if args.algo == "icws" else _parse_grid(args.grid)
    try:
        report = run_verification(
            args.algo, tc, args.m, args.n_examples, args.seed,
            grid=grid, config=_config(args),
        )
    except (ValueError, BagMinHashError) as exc:
        raise SystemExit(str(exc)) from exc
    print(json.dumps(report.to_dict(), sort_keys=True))
    return 0 if abs(report.z) <= args.threshold else 1


def cmd_bench(args: argparse.Namespace) -> int:
    grid = None if args.algo == "icws" else _parse_grid(args.grid)
    try:
        report = run_benchmark(
            args.algo, args.m, args.n, args.reps, args.seed,
            grid=grid, config=_config(args),
        )
    except (ValueError, BagMinHashError) as exc:
        raise SystemExit(str(exc)) from exc
    print(BenchmarkReport.csv_header())
    print(report.csv_row())
    return 0


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="bagminhash", description="Weighted minwise hashing signatures."
    )
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("sign", help="hash a bag file into a signature")
    _add_common(p, grid_default=None)
    p.add_argument("--b", type=int, default=None, help="truncate components to b bits")
    p.add_argument("--input", required=True, help="lines of <id>\\t<weight>")
    p.add_argument("--output", required=True)
    p.add_argument("--format", default="binary", choices=("binary", "json"))
    p.set_defaults(fn=cmd_sign)

    p = sub.add_parser("estimate", help="estimate similarity from two signatures")
    p.add_argument("--a", required=True, help="first signature file")
    p.add_argument("--b", required=True, help="second signature file")
    p.set_defaults(fn=cmd_estimate)

    p = sub.add_parser("verify", help="z-score an algorithm on a test case")
    _add_common(p, grid_default=DEFAULT_GRID_SPEC)
    p.add_argument("--case", required=True, help="canonical case name or JSON file")
    p.add_argument("--n-examples", required=True, type=int)
    p.add_argument("--seed", required=True, type=int)
    p.add_argument("--threshold", type=float, default=3.5, help="|z| failure cutoff")
    p.set_defaults(fn=cmd_verify)

    p = sub.add_parser("bench", help="time signature computation on random bags")
    _add_common(p, grid_default=DEFAULT_GRID_SPEC)
    p.add_argument("--n", required=True, type=int, help="bag size")
    p.add_argument("--reps", required=True, type=int)
    p.add_argument("--seed", required=True, type=int)
    p.set_defaults(fn=cmd_bench)

    return parser


def main(argv: list[str] | None = None) -> int:
    args = build_parser().parse_args(argv)
    return args.fn(args)


if __name__ == "__main__":
    sys.exit(main())
