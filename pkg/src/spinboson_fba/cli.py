"""Command line entry point.  Exit status is 0 iff every check passes."""

from __future__ import annotations

import argparse
import sys

from .config import FORMATS, TASKS, load_config, parse_config
from .errors import FBAError
from .report import emit, text_report
from .tasks import run_task


def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(prog="spinboson-fba", description="Verification suites for the spin-boson chain.")
    sub = ap.add_subparsers(dest="task", required=True)
    for task in TASKS:
        sp = sub.add_parser(task)
        sp.add_argument("--config", help="TOML or JSON run configuration")
        sp.add_argument("--out", help="output directory")
        sp.add_argument("--format", choices=FORMATS)
        sp.add_argument("--seed", type=int)
        sp.add_argument("--nt", type=int, help="boson truncation N_t")
        sp.add_argument("--margin", type=int, help="edge-safe margin")
        sp.add_argument("-q", "--quiet", action="store_true", help="do not print the text report")
    return ap


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    if args.seed is not None and args.seed < 0:
        print("error: --seed must be non-negative", file=sys.stderr)
        return 2
    overrides = {
        "task": args.task,
        "out": args.out,
        "format": args.format,
        "seed": args.seed,
        "nt": args.nt,
        "margin": args.margin,
    }
    try:
        cfg = load_config(args.config, overrides) if args.config else parse_config({}, overrides)
        env = run_task(cfg)
        emit(env, cfg.output["path"], cfg.output["format"])
    except FBAError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    if not args.quiet:
        sys.stdout.write(text_report(env))
    return 0 if env.all_passed else 1


if __name__ == "__main__":
    sys.exit(main())
