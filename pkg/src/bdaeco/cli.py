"""Command line entry point: ``bdaeco run`` and ``bdaeco digest``."""

from __future__ import annotations

import argparse
import logging
import sys

from . import errors
from .scenario import export_reports, run_scenario


def _seed(text: str) -> int:
    try:
        return int(text, 0)
    except ValueError:
        raise argparse.ArgumentTypeError(f"not an integer: {text!r}") from None


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="bdaeco", description="Deterministic building-data-asset ecosystem simulator")
    parser.add_argument("-v", "--verbose", action="store_true")
    sub = parser.add_subparsers(dest="command", required=True)

    run = sub.add_parser("run", help="replay a scenario and export reports")
    run.add_argument("scenario")
    run.add_argument("--seed", type=_seed, default=0)
    run.add_argument("--out", required=True, help="report directory")
    run.add_argument("--strict", action="store_true", help="fail on any rejection not tagged with expect")

    dig = sub.add_parser("digest", help="print the final state digest of a scenario")
    dig.add_argument("scenario")
    dig.add_argument("--seed", type=_seed, default=0)
    dig.add_argument("--strict", action="store_true")
    return parser


def main(argv: list[str] | None = None) -> int:
    args = build_parser().parse_args(argv)
    logging.basicConfig(level=logging.DEBUG if args.verbose else logging.WARNING, format="%(levelname)s %(name)s: %(message)s")
    try:
        report = run_scenario(args.scenario, seed=args.seed, strict=args.strict)
        if args.command == "digest":
            print(report.final_digest)
            return 0
        files = export_reports(report, args.out)
    except (errors.ParseError, errors.AssertionFailure, errors.IoFailure) as exc:
        print(f"error: {exc.code}: {exc}", file=sys.stderr)
        return 2 if isinstance(exc, errors.ParseError) else 1
    print(f"{report.hash_algorithm} {report.final_digest}")
    print(f"commands: {report.command_count}  rejected: {len(report.rejected)}")
    for name in sorted(files):
        print(f"  {files[name]}")
    return 0


if __name__ == "__main__":
    sys.exit(main())
