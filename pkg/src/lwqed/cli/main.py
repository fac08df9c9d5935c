"""``lwqed`` entry point.

Exit codes: 0 success, 2 configuration error, 3 numerical non-convergence,
4 internal invariant violation (also used by ``run --strict`` for a FAIL
verdict).
"""

from __future__ import annotations

import argparse
import datetime
import os
import sys
from pathlib import Path

from ..errors import ConfigurationError, ConvergenceError, InvariantViolation, PreconditionError
from .config import EXPERIMENTS, load_config, validate_config
from .experiments import DESCRIPTIONS, run_experiment
from .io import write_table

EXIT_OK = 0
EXIT_CONFIG = 2
EXIT_CONVERGENCE = 3
EXIT_INVARIANT = 4

JOBS_ENV = "LWQED_JOBS"


def _default_jobs() -> int:
    raw = os.environ.get(JOBS_ENV)
    if not raw:
        return 1
    try:
        n = int(raw)
    except ValueError:
        raise ConfigurationError(f"{JOBS_ENV}={raw!r} is not an integer") from None
    if n < 1:
        raise ConfigurationError(f"{JOBS_ENV} must be >= 1")
    return n


def _parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="lwqed", description="Run light-matter coupling experiments from config files.")
    sub = p.add_subparsers(dest="command", required=True)

    run = sub.add_parser("run", help="run the experiment described by a config file")
    run.add_argument("config")
    run.add_argument("overrides", nargs="*", metavar="key=value", help="dotted-key overrides, e.g. scan.k=10")
    run.add_argument("--jobs", type=int, default=None, help=f"worker cap (default ${JOBS_ENV} or 1)")
    run.add_argument("--output", default=None, help="CSV path (default: config 'output' or <experiment>.csv)")
    run.add_argument("--strict", action="store_true", help="exit with status 4 when the verdict is FAIL")

    val = sub.add_parser("validate", help="check a config file against the schema")
    val.add_argument("config")

    sub.add_parser("list-experiments", help="print the experiment names")
    return p


def _run(args) -> int:
    cfg = load_config(args.config, args.overrides)
    jobs = args.jobs if args.jobs is not None else cfg.get("jobs") or _default_jobs()
    if jobs < 1:
        raise ConfigurationError("--jobs must be >= 1")
    table = run_experiment(cfg, jobs)
    table.metadata["timestamp"] = datetime.datetime.now(datetime.timezone.utc).isoformat(timespec="seconds")
    out = args.output or cfg.get("output") or f"{cfg.experiment}.csv"
    path = Path(out)
    write_table(table, path)
    print(f"{cfg.experiment}: {table.verdict_text} -> {path}")
    if args.strict and not table.verdict:
        return EXIT_INVARIANT
    return EXIT_OK


def main(argv: list[str] | None = None) -> int:
    args = _parser().parse_args(argv)
    try:
        if args.command == "list-experiments":
            for name in EXPERIMENTS:
                print(f"{name:20s} {DESCRIPTIONS[name]}")
            return EXIT_OK
        if args.command == "validate":
            diags = validate_config(args.config)
            for d in diags:
                print(d)
            if diags:
                return EXIT_CONFIG
            print(f"{args.config}: ok")
            return EXIT_OK
        return _run(args)
    except (ConfigurationError, PreconditionError) as exc:
        print(f"configuration error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except ConvergenceError as exc:
        print(f"numerical non-convergence: {type(exc).__name__}: {exc}", file=sys.stderr)
        return EXIT_CONVERGENCE
    except InvariantViolation as exc:
        print(f"internal invariant violation: {exc}", file=sys.stderr)
        return EXIT_INVARIANT


if __name__ == "__main__":
    sys.exit(main())
