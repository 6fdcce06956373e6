"""Command-line interface: `run` executes a sweep, `report` re-aggregates results.

Exit codes: 0 success, 1 configuration/usage error, 2 I/O error.
"""

from __future__ import annotations

import argparse
import json
import sys
import time
from pathlib import Path

from .channel import ConfigurationError
from .harness import BenchmarkConfig, plan_sweep, run_benchmark, run_report


def _csv_list(text: str) -> list[str]:
    return [item.strip() for item in text.split(",") if item.strip()]


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="commstress",
        description="Stress-test cooperative multi-agent communication strategies "
        "under parameterized channel impairments.",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    run = sub.add_parser("run", help="execute a benchmark sweep")
    run.add_argument("--config", type=Path, help="JSON config file")
    run.add_argument("--out", help="output directory (default: out)")
    run.add_argument("--episodes", type=int)
    run.add_argument("--threads", type=int)
    run.add_argument("--tasks", type=_csv_list, help="comma list: cp,nav,search")
    run.add_argument("--methods", type=_csv_list, help="comma list of strategies")
    run.add_argument("--impairments", type=_csv_list, help="comma list of dimensions")
    run.add_argument("--levels", type=int)
    run.add_argument("--seed-base", type=int, dest="seed_base")
    run.add_argument("--channel-model", dest="channel_model",
                     help="bernoulli or gilbert-elliott")
    run.add_argument("--burstiness", type=float)
    run.add_argument("--budget", choices=("none", "1x", "2x"))
    run.add_argument("--lambda", dest="lambdas", type=_csv_list,
                     help="comma list of staleness-decay values")
    run.add_argument("--joint", type=_csv_list,
                     help="two impairments swept jointly, e.g. packet_loss,bandwidth")

    report = sub.add_parser("report", help="summarize results and emit figure data")
    report.add_argument("--results", type=Path, required=True,
                        help="results directory or results.csv path")
    report.add_argument("--out", type=Path, help="output directory for summary + tables")
    return parser


def _config_from_args(args: argparse.Namespace) -> BenchmarkConfig:
    data: dict = {}
    if args.config is not None:
        try:
            data = json.loads(Path(args.config).read_text(encoding="utf-8"))
        except OSError as exc:
            raise ConfigurationError(f"cannot read config file: {exc}")
        except json.JSONDecodeError as exc:
            raise ConfigurationError(f"config file is not valid JSON: {exc}")
        if not isinstance(data, dict):
            raise ConfigurationError("config file must hold a JSON object")

    overrides = {
        "out": args.out,
        "episodes": args.episodes,
        "threads": args.threads,
        "tasks": args.tasks,
        "methods": args.methods,
        "impairments": args.impairments,
        "levels": args.levels,
        "seed_base": args.seed_base,
        "channel_model": args.channel_model,
        "burstiness": args.burstiness,
        "budget": args.budget,
        "lambdas": args.lambdas,
        "joint": args.joint,
    }
    for key, value in overrides.items():
        if value is not None:
            data[key] = value
    if "channel_model" in data and isinstance(data["channel_model"], str):
        data["channel_model"] = data["channel_model"].replace("-", "_")
    if "lambdas" in data and data["lambdas"] is not None:
        data["lambdas"] = [float(v) for v in data["lambdas"]]
    return BenchmarkConfig.from_dict(data)


def main(argv: list[str] | None = None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        # argparse exits 2 on usage errors and 0 on --help
        return 0 if exc.code == 0 else 1

    try:
        if args.command == "run":
            config = _config_from_args(args)
            plan = plan_sweep(config)
            print(f"running {len(plan)} episodes "
                  f"({len(config.methods)} methods x {len(config.tasks)} tasks)...")
            started = time.perf_counter()
            results_path, summary_path = run_benchmark(config)
            elapsed = time.perf_counter() - started
            print(f"wrote {results_path} and {summary_path} in {elapsed:.1f}s")
            return 0
        if args.command == "report":
            written = run_report(args.results, args.out)
            for path in written:
                print(f"wrote {path}")
            return 0
    except ConfigurationError as exc:
        print(f"configuration error: {exc}", file=sys.stderr)
        return 1
    except OSError as exc:
        print(f"i/o error: {exc}", file=sys.stderr)
        return 2
    return 1


def entrypoint() -> None:
    sys.exit(main())


if __name__ == "__main__":
    entrypoint()
