"""Command line interface.

Exit codes: 0 success, 1 validation failure, 2 runtime failure.
"""

from __future__ import annotations

import argparse
import os
import sys

from .harness import run_scenario, sweep
from .metrics import emit_csv, emit_json, summary_text
from .mining import ValidationError
from .scenario import load_scenario, shipped_scenario_names


def _parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(
        prog="nakasim",
        description="Deterministic Nakamoto-consensus network simulator")
    sub = p.add_subparsers(dest="command", required=True)

    run = sub.add_parser("run", help="run one scenario")
    run.add_argument("scenario", help="scenario file or shipped name")
    run.add_argument("--seed", type=int, default=None)
    run.add_argument("--out", default=None, help="output directory")
    run.add_argument("--format", choices=("csv", "json", "summary"),
                     default="summary")

    sw = sub.add_parser("sweep", help="sweep a numeric scenario parameter")
    sw.add_argument("scenario")
    sw.add_argument("--param", required=True,
                    help="dotted path, e.g. miners.0.hash_share")
    sw.add_argument("--values", required=True,
                    help="comma-separated numbers")
    sw.add_argument("--seeds", type=int, default=30,
                    help="seeds per value (default 30)")
    sw.add_argument("--metric", default=None,
                    help="dotted report path to aggregate")
    sw.add_argument("--out", default=None)

    sub.add_parser("list-scenarios", help="list shipped scenarios")

    val = sub.add_parser("validate", help="validate a scenario file")
    val.add_argument("scenario")
    return p


def _write(out_dir, name, text):
    os.makedirs(out_dir, exist_ok=True)
    path = os.path.join(out_dir, name)
    with open(path, "w", encoding="utf-8") as fh:
        fh.write(text)
    return path


def main(argv=None) -> int:
    args = _parser().parse_args(argv)
    try:
        if args.command == "list-scenarios":
            for name in shipped_scenario_names():
                print(name)
            return 0

        if args.command == "validate":
            scenario = load_scenario(args.scenario)
            print(f"{scenario.name}: ok "
                  f"({len(scenario.defaults_applied)} defaults applied)")
            return 0

        if args.command == "run":
            scenario = load_scenario(args.scenario)
            report = run_scenario(scenario, seed=args.seed)
            if args.out:
                base = scenario.name
                seed = report["meta"]["seed"]
                csv_path = _write(args.out, f"{base}-seed{seed}.csv",
                                  emit_csv(report))
                _write(args.out, f"{base}-seed{seed}.json",
                       emit_json(report))
                print(f"wrote {csv_path} and .json", file=sys.stderr)
            if args.format == "csv":
                sys.stdout.write(emit_csv(report))
            elif args.format == "json":
                sys.stdout.write(emit_json(report))
            else:
                sys.stdout.write(summary_text(report))
            return 0

        if args.command == "sweep":
            scenario = load_scenario(args.scenario)
            try:
                values = [float(v) for v in args.values.split(",") if v]
            except ValueError as e:
                raise ValidationError(f"bad sweep values: {e}") from e
            rows = sweep(scenario, args.param, values,
                         seeds=range(args.seeds), metric_path=args.metric)
            lines = ["value,mean,ci_low,ci_high,n"]
            for row in rows:
                if args.metric:
                    lines.append(
                        f"{row['value']},{row['mean']!r},{row['ci_low']!r},"
                        f"{row['ci_high']!r},{row['n']}")
                else:
                    lines.append(f"{row['value']},,,,{len(row['seeds'])}")
            text = "\n".join(lines) + "\n"
            if args.out:
                _write(args.out, f"{scenario.name}-sweep.csv", text)
            sys.stdout.write(text)
            return 0
    except ValidationError as e:
        print(f"validation error: {e}", file=sys.stderr)
        return 1
    except Exception as e:  # noqa: BLE001 - CLI boundary
        print(f"runtime error: {type(e).__name__}: {e}", file=sys.stderr)
        return 2
    return 2


if __name__ == "__main__":
    sys.exit(main())
