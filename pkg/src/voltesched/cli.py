"""Command-line entry point.

Subcommands:
  run          sweep VoLTE user counts across policies, emit the master CSV
  plotdata     slice a master CSV into one tidy file per figure family
  ratemap-csv  export the embedded CQI table

Exit codes: 0 success, 2 configuration error, 3 instance-size-cap refusal.
"""

from __future__ import annotations

import argparse
import sys

from . import ratemap
from .config import ConfigError, parse_config
from .experiment import PLOT_FAMILIES, SizeCapError, emit_plotdata, rows_to_csv, run_experiment

EXIT_OK = 0
EXIT_CONFIG = 2
EXIT_SIZE_CAP = 3


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="voltesched")
    sub = parser.add_subparsers(dest="command", required=True)

    run = sub.add_parser("run", help="run a scheduling experiment sweep")
    run.add_argument("--config", help="key=value config file")
    run.add_argument("--bandwidth", type=float, help="LTE bandwidth in MHz (1.4, 3 or 10)")
    run.add_argument("--num-data", type=int, help="number of best-effort data users")
    run.add_argument("--volte-sweep", help="comma-separated VoLTE user counts")
    run.add_argument(
        "--policy", action="append", help="scheduling policy (repeatable)", default=None
    )
    run.add_argument("--runs", type=int, help="Monte-Carlo repetitions per sweep point")
    run.add_argument("--seed", type=int, help="master seed")
    run.add_argument("--gamma", type=float, help="PF averaging factor in (0,1)")
    run.add_argument("--out", help="output CSV path (default: stdout)")
    run.add_argument(
        "--strict-pseudocode",
        action="store_true",
        default=None,
        help="replicate the published heuristic pseudocode verbatim",
    )
    run.add_argument(
        "--per-tti-fading",
        action="store_true",
        default=None,
        help="redraw fading every TTI (TTI-level and heuristic policies only)",
    )

    plot = sub.add_parser("plotdata", help="aggregate a master CSV for one figure family")
    plot.add_argument("csv", help="master CSV produced by `run`")
    plot.add_argument("family", help=f"one of {', '.join(PLOT_FAMILIES)}")
    plot.add_argument("--out", help="output CSV path (default: stdout)")

    rm = sub.add_parser("ratemap-csv", help="export the CQI/MCS table as CSV")
    rm.add_argument("out", help="output CSV path")
    return parser


def _run_command(args) -> int:
    overrides = {
        "bandwidth_mhz": args.bandwidth,
        "num_data": args.num_data,
        "volte_sweep": tuple(int(s) for s in args.volte_sweep.split(",")) if args.volte_sweep else None,
        "policies": tuple(args.policy) if args.policy else None,
        "runs": args.runs,
        "seed": args.seed,
        "gamma": args.gamma,
        "strict_pseudocode": args.strict_pseudocode,
        "per_tti_fading": args.per_tti_fading,
    }
    try:
        cfg = parse_config(args.config, overrides)
    except (ConfigError, OSError) as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    try:
        rows = run_experiment(cfg)
    except SizeCapError as exc:
        print(f"refused: {exc}", file=sys.stderr)
        return EXIT_SIZE_CAP
    text = rows_to_csv(rows)
    if args.out:
        with open(args.out, "w") as fh:
            fh.write(text)
    else:
        sys.stdout.write(text)
    return EXIT_OK


def _plotdata_command(args) -> int:
    try:
        with open(args.csv) as fh:
            master = fh.read()
    except OSError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    try:
        text = emit_plotdata(master, args.family)
    except ValueError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    if args.out:
        with open(args.out, "w") as fh:
            fh.write(text)
    else:
        sys.stdout.write(text)
    return EXIT_OK


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    if args.command == "run":
        return _run_command(args)
    if args.command == "plotdata":
        return _plotdata_command(args)
    if args.command == "ratemap-csv":
        ratemap.export_table_csv(args.out)
        return EXIT_OK
    return EXIT_CONFIG  # pragma: no cover


if __name__ == "__main__":
    raise SystemExit(main())
