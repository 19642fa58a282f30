"""Command line entry point: ``supergeo run <scenario> [--report p] [--seed s]``."""

from __future__ import annotations

import argparse
import sys

from .scenario import run_scenario


def main(argv=None) -> int:
    parser = argparse.ArgumentParser(prog="supergeo")
    sub = parser.add_subparsers(dest="command", required=True)
    runp = sub.add_parser("run", help="execute a scenario file")
    runp.add_argument("scenario", help="path to the scenario file")
    runp.add_argument("--report", default=None, help="write the report here")
    runp.add_argument("--seed", type=int, default=0, help="recorded in the report")
    args = parser.parse_args(argv)

    try:
        with open(args.scenario, "r", encoding="utf-8") as fh:
            text = fh.read()
    except OSError as exc:
        print(f"supergeo: cannot read scenario: {exc}", file=sys.stderr)
        return 2

    import os

    report = run_scenario(text, name=os.path.basename(args.scenario), seed=args.seed)
    rendered = report.render()
    if args.report:
        with open(args.report, "w", encoding="utf-8") as fh:
            fh.write(rendered)
    else:
        sys.stdout.write(rendered)
    return report.exit_code


if __name__ == "__main__":
    raise SystemExit(main())
