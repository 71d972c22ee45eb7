"""Command line entry point.

Exit statuses: 0 success, 1 witness verification failed, 2 the scenario or
report could not be parsed, 3 a numerical precondition failed.
"""
from __future__ import annotations

import argparse
import json
import sys
from pathlib import Path

from . import report as rpt
from .errors import ScenarioError
from .scenario import list_shipped, load, shipped_path

EXIT_OK, EXIT_VERIFY, EXIT_PARSE, EXIT_PRECONDITION = 0, 1, 2, 3


def _resolve(target: str) -> Path:
    p = Path(target)
    if p.exists():
        return p
    return shipped_path(target)


def cmd_run(args) -> int:
    try:
        scn = load(_resolve(args.file))
        timings = {} if args.timings else None
        report = rpt.run_scenario(scn, contract=args.contract, exact=args.exact,
                                  timings=timings)
    except ScenarioError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_PARSE
    try:
        paths = rpt.emit(report, args.out, args.format, timings)
    except OSError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_PARSE
    for p in paths:
        print(p)
    if report["status"] != "ok":
        bad = [e["name"] for e in report["experiments"] if e["verdict"] == "precondition_failed"]
        print(f"precondition failed in: {', '.join(bad)}", file=sys.stderr)
        return EXIT_PRECONDITION
    return EXIT_OK


def cmd_list(args) -> int:
    for name in list_shipped():
        print(name)
    return EXIT_OK


def cmd_verify(args) -> int:
    try:
        report = rpt.load_report(args.report)
    except (OSError, json.JSONDecodeError) as exc:
        print(f"error: cannot read report: {exc}", file=sys.stderr)
        return EXIT_PARSE
    results = rpt.verify(report)
    failed = 0
    for name, i, problems in results:
        if problems:
            failed += 1
            print(f"FAIL {name}[{i}]: {'; '.join(problems)}")
        else:
            print(f"ok   {name}[{i}]")
    print(f"{len(results)} witnesses checked, {failed} failed")
    return EXIT_VERIFY if failed else EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(prog="islab", description=__doc__.splitlines()[0])
    sub = ap.add_subparsers(dest="command", required=True)
    r = sub.add_parser("run", help="run a scenario file or shipped scenario name")
    r.add_argument("file")
    r.add_argument("--out", default="reports")
    r.add_argument("--format", choices=("json", "csv", "both"), default="both")
    r.add_argument("--contract", action="store_true",
                   help="rescale operators to A/(||A||+1) before the injectivity pipeline")
    r.add_argument("--exact", action="store_true",
                   help="prefer exact rational arithmetic where inputs allow")
    r.add_argument("--timings", action="store_true",
                   help="write runtimes to a separate .timings.json file")
    r.set_defaults(func=cmd_run)
    ls = sub.add_parser("list-scenarios", help="list shipped scenarios")
    ls.set_defaults(func=cmd_list)
    v = sub.add_parser("verify", help="re-check every witness in a report")
    v.add_argument("report")
    v.set_defaults(func=cmd_verify)
    return ap


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    return args.func(args)


if __name__ == "__main__":  # pragma: no cover
    sys.exit(main())
