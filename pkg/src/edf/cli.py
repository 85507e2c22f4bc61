"""``edf`` command line: estimate, table, simulate.

Errors go to stderr as one line ``edf: error: <Code>: <message>`` and the
process exits with status 1 (2 for usage errors, as argparse does).
"""

from __future__ import annotations

import argparse
import os
import sys
from pathlib import Path

import numpy as np

from . import __version__
from .core import EdfError, EstimatorKind, estimate_all
from .harness import (
    DEFAULT_REPS,
    PAPER_K,
    PAPER_NU,
    InvalidGrid,
    SimCell,
    grid_cells,
    run_cell,
    run_grid,
)
from .io import OutputFormat, format_estimates, format_summary, format_table, parse_components

SEED_ENV = "EDF_SEED"

_ESTIMATOR_NAMES = {
    "satterthwaite": EstimatorKind.SATTERTHWAITE,
    "naep": EstimatorKind.NAEP,
    "proposed": EstimatorKind.PROPOSED_V1,
    "proposed_v1": EstimatorKind.PROPOSED_V1,
    "improved": EstimatorKind.IMPROVED,
}


def _int_list(values: list[str]) -> list[int]:
    out = []
    for v in values:
        for part in v.split(","):
            part = part.strip()
            if not part:
                continue
            try:
                out.append(int(part))
            except ValueError:
                raise InvalidGrid(f"not an integer: {part!r}") from None
    return out


def _estimators(values: list[str]) -> list[EstimatorKind]:
    names = [p.strip() for v in values or [] for p in v.split(",") if p.strip()]
    if not names or "all" in names:
        return list(EstimatorKind)
    kinds = []
    for name in names:
        if name not in _ESTIMATOR_NAMES:
            raise EdfError(f"unknown estimator {name!r}")
        kind = _ESTIMATOR_NAMES[name]
        if kind not in kinds:
            kinds.append(kind)
    return kinds


def _seed(arg: int | None) -> int:
    if arg is not None:
        return arg
    env = os.environ.get(SEED_ENV)
    if env is None or not env.strip():
        return 0
    try:
        return int(env.strip(), 0)
    except ValueError:
        raise EdfError(f"{SEED_ENV} is not an integer: {env!r}") from None


def _read_input(path: str) -> bytes:
    if path == "-":
        return sys.stdin.buffer.read()
    try:
        return Path(path).read_bytes()
    except OSError as exc:
        raise EdfError(f"cannot read {path}: {exc.strerror}") from None


def cmd_estimate(args: argparse.Namespace) -> str:
    fmt = args.input_format
    if fmt is None and args.input != "-":
        suffix = Path(args.input).suffix.lower()
        fmt = {".json": "json", ".csv": "csv"}.get(suffix)
    components = parse_components(_read_input(args.input), fmt)
    kinds = _estimators(args.estimator)
    results = estimate_all(components)
    return format_estimates({k: results[k] for k in kinds}, args.format)


def cmd_table(args: argparse.Namespace) -> str:
    seed = _seed(args.seed)
    if args.paper_grid or (not args.k_list and not args.nu_list):
        k_list, nu_list = list(PAPER_K), list(PAPER_NU)
    else:
        k_list = _int_list(args.k_list) if args.k_list else list(PAPER_K)
        nu_list = _int_list(args.nu_list) if args.nu_list else list(PAPER_NU)
    cells = grid_cells(k_list, nu_list, args.reps, seed, args.sigma2)
    return format_table(run_grid(cells, workers=args.workers), args.format)


def cmd_simulate(args: argparse.Namespace) -> str:
    cell = SimCell(args.k, args.nu, args.reps, args.sigma2, _seed(args.seed))
    summary = run_cell(cell, workers=args.workers, keep_ratios=args.dump_ratios is not None)
    if args.dump_ratios is not None:
        kinds = list(summary.ratios)
        data = np.column_stack([summary.ratios[k] for k in kinds])
        np.savetxt(args.dump_ratios, data, delimiter=",", header=",".join(map(str, kinds)),
                   comments="", fmt="%.17g")
    return format_summary(summary, args.format)


def _positive_int(text: str) -> int:
    try:
        value = int(text)
    except ValueError:
        raise argparse.ArgumentTypeError(f"not an integer: {text!r}") from None
    if value < 1:
        raise argparse.ArgumentTypeError(f"must be >= 1, got {value}")
    return value


def _seed_arg(text: str) -> int:
    try:
        value = int(text, 0)
    except ValueError:
        raise argparse.ArgumentTypeError(f"not an integer: {text!r}") from None
    if not 0 <= value < 2**64:
        raise argparse.ArgumentTypeError("seed must be in [0, 2**64)")
    return value


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="edf",
        description="Effective degrees of freedom for sums of variance components.",
    )
    parser.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    sub = parser.add_subparsers(dest="command", required=True)
    formats = [f.value for f in OutputFormat]

    p = sub.add_parser("estimate", help="estimate effective df from a component file")
    p.add_argument("--input", "-i", required=True, help="CSV (s2,df) or JSON file; '-' for stdin")
    p.add_argument("--input-format", choices=["csv", "json"], default=None,
                   help="input format (default: from extension or content)")
    p.add_argument("--estimator", "-e", action="append", default=None,
                   help="satterthwaite, naep, proposed, improved or all (repeatable, "
                        "comma-separated; default all)")
    p.add_argument("--format", "-f", choices=formats, default="csv")
    p.set_defaults(func=cmd_estimate)

    def sim_options(p: argparse.ArgumentParser) -> None:
        p.add_argument("--reps", type=_positive_int, default=DEFAULT_REPS)
        p.add_argument("--seed", type=_seed_arg, default=None,
                       help=f"master seed (default: ${SEED_ENV}, else 0)")
        p.add_argument("--sigma2", type=float, default=1.0, help="true component variance")
        p.add_argument("--workers", type=_positive_int, default=1, help="worker threads")
        p.add_argument("--format", "-f", choices=formats, default="csv")

    p = sub.add_parser("table", help="simulate a (K, nu) grid of ratio statistics")
    p.add_argument("--k-list", nargs="+", default=None, help="numbers of components")
    p.add_argument("--nu-list", nargs="+", default=None, help="df per component")
    p.add_argument("--paper-grid", action="store_true",
                   help="K in 5..100 by nu in 1..25, the 49-cell reference grid")
    sim_options(p)
    p.set_defaults(func=cmd_table)

    p = sub.add_parser("simulate", help="full ratio statistics for one (K, nu) cell")
    p.add_argument("--k", type=int, required=True)
    p.add_argument("--nu", type=int, required=True)
    p.add_argument("--dump-ratios", default=None, metavar="PATH",
                   help="write per-replication ratios to PATH as CSV")
    sim_options(p)
    p.set_defaults(func=cmd_simulate)
    return parser


def main(argv: list[str] | None = None) -> int:
    args = build_parser().parse_args(argv)
    try:
        out = args.func(args)
    except EdfError as exc:
        print(f"edf: error: {exc.code}: {exc}", file=sys.stderr)
        return 1
    sys.stdout.write(out)
    return 0


if __name__ == "__main__":
    sys.exit(main())
