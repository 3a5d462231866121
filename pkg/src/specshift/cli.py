"""Command-line interface.

    specshift run <config.json> [--out DIR] [--threads K] [--strict]
    specshift battery --seed S --count K [--out DIR] [--threads K] [--strict]
    specshift show-report <report.json>

Exit codes: 0 all checks pass, 1 numerical failure, 2 usage/config error.
"""

from __future__ import annotations

import argparse
import json
import sys
from concurrent.futures import ThreadPoolExecutor
from typing import List

from .errors import ConfigError, SpecshiftError
from .report import RunReport, summarize, write_report
from .runner import run_scenario
from .scenario import generate_random_scenario, load_config


def _build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="specshift",
        description="Verification batteries for spectral flow / shift-function identities",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    p_run = sub.add_parser("run", help="run the experiments of one scenario config")
    p_run.add_argument("config", help="scenario JSON file")
    _common(p_run)

    p_bat = sub.add_parser("battery", help="run generated scenarios")
    p_bat.add_argument("--seed", type=int, required=True)
    p_bat.add_argument("--count", type=int, required=True)
    _common(p_bat)

    p_show = sub.add_parser("show-report", help="pretty-print a report JSON")
    p_show.add_argument("report", help="report JSON file")
    return parser


def _common(p: argparse.ArgumentParser) -> None:
    p.add_argument("--out", default="out", help="output directory (default: ./out)")
    p.add_argument("--threads", type=int, default=1, help="parallel workers")
    p.add_argument("--strict", action="store_true", help="treat warnings as failures")


def _finish(reports: List[RunReport], out: str, strict: bool) -> int:
    ok = True
    for rep in sorted(reports, key=lambda r: r.name):
        write_report(rep, out)
        print(summarize(rep))
        ok = ok and rep.overall_pass(strict=strict)
    return 0 if ok else 1


def main(argv=None) -> int:
    parser = _build_parser()
    args = parser.parse_args(argv)
    try:
        if args.command == "run":
            config = load_config(args.config)
            rep = run_scenario(config, threads=args.threads)
            return _finish([rep], args.out, args.strict)
        if args.command == "battery":
            if args.count < 1:
                raise ConfigError("--count must be >= 1")
            targets = [0, 1, -1, 2, -2]
            configs = []
            for k in range(args.count):
                d = 1 + k % 3
                feasible = [t for t in targets if abs(t) <= d]
                target = feasible[k % len(feasible)]
                configs.append(generate_random_scenario(args.seed + k, d, target))
            if args.threads > 1:
                with ThreadPoolExecutor(max_workers=args.threads) as pool:
                    reports = list(pool.map(run_scenario, configs))
            else:
                reports = [run_scenario(c) for c in configs]
            return _finish(reports, args.out, args.strict)
        if args.command == "show-report":
            with open(args.report, "r", encoding="utf-8") as fh:
                payload = json.load(fh)
            print(json.dumps(payload, indent=2, sort_keys=True))
            return 0
        raise ConfigError(f"unknown command {args.command!r}")
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return 2
    except (OSError, json.JSONDecodeError) as exc:
        print(f"i/o error: {exc}", file=sys.stderr)
        return 2
    except SpecshiftError as exc:
        print(f"numerical failure: {type(exc).__name__}: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
