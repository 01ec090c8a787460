"""Command-line experiment runner.

Subcommands:
    verify     closed-form oracle suite (no config needed)
    pipeline   gauge + holomorphic-approximation run on one specimen
    sequence   family generation, bubble tree, energy ledger, neck fits
    report     re-emit CSV reports from a cached results.json

Exit codes: 0 pass, 1 assertion failure, 2 configuration error,
3 numerical failure.
"""

from __future__ import annotations

import argparse
import sys

from .config import ExperimentConfig, load_config
from .errors import ConfigError, NumericsError, PreconditionError
from .experiments import run_pipeline, run_report, run_sequence, run_verify
from .reports import ensure_dir, write_csv
from .experiments import VERIFY_COLUMNS

EXIT_PASS = 0
EXIT_ASSERTION = 1
EXIT_CONFIG = 2
EXIT_NUMERICAL = 3


def _build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="bubblelab",
                                description=__doc__.strip().splitlines()[0])
    sub = p.add_subparsers(dest="command", required=True)
    for name in ("verify", "pipeline", "sequence", "report"):
        sp = sub.add_parser(name)
        sp.add_argument("--config", default=None,
                        help="experiment config (JSON)")
        sp.add_argument("--out", default="out", help="output directory")
        sp.add_argument("--seed", type=int, default=None,
                        help="override the config seed")
        sp.add_argument("--resolution", type=int, default=None,
                        help="resolution multiplier override")
        sp.add_argument("--stage", default=None,
                        help="comma-separated stage list override")
    return p


def _load(args) -> ExperimentConfig:
    if args.config is None:
        cfg = ExperimentConfig()
    else:
        cfg = load_config(args.config)
    overrides = {}
    if args.seed is not None:
        overrides["seed"] = args.seed
    if args.resolution is not None:
        overrides["resolution_mult"] = args.resolution
    if args.stage is not None:
        overrides["stages"] = tuple(s.strip()
                                    for s in args.stage.split(",") if s)
    if overrides:
        from dataclasses import replace
        cfg = replace(cfg, **overrides)
    return cfg


def main(argv=None) -> int:
    args = _build_parser().parse_args(argv)
    try:
        if args.command == "verify":
            rows, ok = run_verify()
            for r in rows:
                print(f"{r['status']:4s}  {r['check']}")
            ensure_dir(args.out)
            write_csv(f"{args.out}/verify.csv", VERIFY_COLUMNS, rows)
            return EXIT_PASS if ok else EXIT_ASSERTION

        cfg = _load(args)
        if args.command == "sequence":
            results = run_sequence(cfg, args.out)
        elif args.command == "pipeline":
            results = run_pipeline(cfg, args.out)
        elif args.command == "report":
            results = run_report(args.out)
        else:  # pragma: no cover - argparse enforces the choices
            return EXIT_CONFIG
        errors = results.get("errors", {})
        if errors:
            for stage, msg in errors.items():
                print(f"stage {stage} failed: {msg}", file=sys.stderr)
            return EXIT_NUMERICAL
        print(f"wrote reports to {args.out}")
        return EXIT_PASS
    except (ConfigError, FileNotFoundError) as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except PreconditionError as exc:
        print(f"precondition violated: {exc}", file=sys.stderr)
        return EXIT_NUMERICAL
    except NumericsError as exc:
        print(f"numerical failure: {exc}", file=sys.stderr)
        return EXIT_NUMERICAL


if __name__ == "__main__":
    sys.exit(main())
