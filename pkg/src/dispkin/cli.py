"""Command line entry point: ``dispkin {converge,compare,epochal,step}``.

Exit codes: 0 success, 2 configuration error, 3 numerical failure, 4 I/O error.
"""
from __future__ import annotations

import argparse
import sys
from pathlib import Path

from .errors import DispkinError, OutputError
from .experiments import (load_config, run_compare, run_convergence, run_epochal,
                          run_single_step, serialize_config, write_csv, CONVERGENCE_COLUMNS,
                          COMPARE_COLUMNS)


def _flags(suppress: bool) -> argparse.ArgumentParser:
    # the subcommand copy must not reset values given before the subcommand
    d = {"default": argparse.SUPPRESS} if suppress else {}
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--config", metavar="PATH", help="key = value configuration file", **d)
    common.add_argument("--out", metavar="DIR", help="output directory (overrides output_dir)", **d)
    common.add_argument("--override", metavar="KEY=VALUE", action="append",
                        help="override one configuration key (repeatable)", **d)
    return common


def _parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="dispkin", parents=[_flags(False)],
                                description="Disparate-mass mixture experiments.")
    common = _flags(True)
    sub = p.add_subparsers(dest="command", required=True)
    sub.add_parser("converge", parents=[common], help="nested-grid convergence table")
    sub.add_parser("compare", parents=[common], help="AE run against an SP reference")
    sub.add_parser("epochal", parents=[common], help="AP relaxation time series")
    sub.add_parser("step", parents=[common], help="dump a single step")
    return p


def main(argv: list[str] | None = None) -> int:
    args = _parser().parse_args(argv)
    try:
        cfg = load_config(args.config, args.override or ())
        out = Path(args.out or cfg.output_dir)
        if args.command == "converge":
            rows = run_convergence(cfg)
            write_csv(out / "convergence.csv", CONVERGENCE_COLUMNS, rows)
        elif args.command == "compare":
            row = run_compare(cfg)
            write_csv(out / "compare.csv", COMPARE_COLUMNS, [row])
        elif args.command == "epochal":
            run_epochal(cfg, out)
        else:
            run_single_step(cfg, out)
        try:
            (out / "config.txt").write_text(serialize_config(cfg), encoding="utf-8")
        except OSError as exc:
            raise OutputError(f"cannot write {out / 'config.txt'}: {exc.strerror or exc}") from None
    except DispkinError as exc:
        print(f"dispkin: error: {exc}", file=sys.stderr)
        return exc.exit_code
    print(f"dispkin: wrote results to {out}")
    return 0


if __name__ == "__main__":
    sys.exit(main())
