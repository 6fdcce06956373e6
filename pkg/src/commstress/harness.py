"""Benchmark harness: configuration, seed derivation, sweep execution, persistence.

A sweep runs every (method, task, impairment, severity level, episode)
combination of its configuration. Randomness is derived per condition:

  * the environment stream depends on (seed_base, episode, task, impairment)
    but NOT on the severity level or the method, so every severity level of a
    dimension replays the same layouts and the clean level is a true paired
    baseline;
  * the channel stream additionally mixes in the severity level.

Methods never enter the seed derivation, so strategies face identical worlds
and identical channel draw streams, which is what makes the documented
strategy equivalences exact.
"""

from __future__ import annotations

import csv
import io
import json
import time
from dataclasses import dataclass
from multiprocessing import Pool
from pathlib import Path
from typing import NamedTuple, Optional

from . import __version__
from .channel import (
    ChannelParams,
    ConfigurationError,
    DIMENSIONS,
    ImpairmentSpec,
    SIGMA_MAX,
)
from .metrics import (
    ConditionContext,
    CurvePoint,
    RobustnessCurve,
    aurc,
    classify_failure,
    mean_std,
    npd,
    rank_stability,
    rank_table,
)
from .rng import MASK64, mix64, substream_seed
from .strategies import (
    BUDGETS,
    BudgetConfig,
    DEFAULT_LAMBDA,
    REDUNDANT,
    SINGLE_COPY,
    STRATEGIES,
    StrategyParams,
    StrategyRuntime,
)
from .tasks import ENV_STREAM, CHANNEL_STREAM, EpisodeConfig, TASKS, run_episode

CSV_HEADER = (
    "method,task,impairment,severity,episode,seed,score,precision,recall,"
    "bits_per_step,msgs_per_step,failure_mode"
)

RESULTS_FILE = "results.csv"
SUMMARY_FILE = "summary.json"

CHANNEL_MODELS = ("bernoulli", "gilbert_elliott")


@dataclass(frozen=True)
class BenchmarkConfig:
    """Full sweep description; defaults reproduce the headline benchmark."""

    methods: tuple[str, ...] = STRATEGIES
    tasks: tuple[str, ...] = TASKS
    impairments: tuple[str, ...] = DIMENSIONS
    levels: int = 11
    episodes: int = 30
    seed_base: int = 42
    channel_model: str = "bernoulli"
    burstiness: float = 0.0
    budget: str = "none"
    lambdas: tuple[float, ...] = (DEFAULT_LAMBDA,)
    joint: Optional[tuple[str, str]] = None
    threads: int = 1
    out_dir: str = "out"

    def __post_init__(self):
        for name, known, values in (
            ("method", STRATEGIES, self.methods),
            ("task", TASKS, self.tasks),
            ("impairment", DIMENSIONS, self.impairments),
        ):
            if not values:
                raise ConfigurationError(f"at least one {name} is required")
            for value in values:
                if value not in known:
                    raise ConfigurationError(f"unknown {name}: {value!r}")
        if self.levels < 2:
            raise ConfigurationError("levels must be at least 2")
        if self.episodes < 1:
            raise ConfigurationError("episodes must be at least 1")
        if self.threads < 1:
            raise ConfigurationError("threads must be at least 1")
        if self.channel_model not in CHANNEL_MODELS:
            raise ConfigurationError(f"unknown channel model: {self.channel_model!r}")
        if self.budget not in BUDGETS:
            raise ConfigurationError(f"unknown budget: {self.budget!r}")
        if not self.lambdas:
            raise ConfigurationError("at least one lambda is required")
        if self.joint is not None:
            a, b = self.joint
            if a not in DIMENSIONS or b not in DIMENSIONS:
                raise ConfigurationError(f"unknown joint impairment pair: {self.joint!r}")
            if a == b:
                raise ConfigurationError("joint impairments must differ")
        # canonicalize subset ordering so plans never depend on input order
        object.__setattr__(
            self, "methods", tuple(m for m in STRATEGIES if m in set(self.methods))
        )
        object.__setattr__(self, "tasks", tuple(t for t in TASKS if t in set(self.tasks)))
        object.__setattr__(
            self, "impairments", tuple(d for d in DIMENSIONS if d in set(self.impairments))
        )

    def channel_params(self) -> ChannelParams:
        return ChannelParams(loss_model=self.channel_model, burstiness=self.burstiness)

    def to_dict(self) -> dict:
        return {
            "methods": list(self.methods),
            "tasks": list(self.tasks),
            "impairments": list(self.impairments),
            "levels": self.levels,
            "episodes": self.episodes,
            "seed_base": self.seed_base,
            "channel_model": self.channel_model,
            "burstiness": self.burstiness,
            "budget": self.budget,
            "lambdas": list(self.lambdas),
            "joint": list(self.joint) if self.joint else None,
            "threads": self.threads,
            "out": self.out_dir,
        }

    @classmethod
    def from_dict(cls, data: dict) -> "BenchmarkConfig":
        known = {
            "methods", "tasks", "impairments", "levels", "episodes", "seed_base",
            "channel_model", "burstiness", "budget", "lambdas", "joint", "threads",
            "out",
        }
        unknown = set(data) - known
        if unknown:
            raise ConfigurationError(f"unknown config keys: {sorted(unknown)}")
        kwargs = dict(data)
        out_dir = kwargs.pop("out", None)
        for key in ("methods", "tasks", "impairments", "lambdas"):
            if key in kwargs and kwargs[key] is not None:
                kwargs[key] = tuple(kwargs[key])
        if kwargs.get("joint") is not None:
            joint = kwargs["joint"]
            if len(joint) != 2:
                raise ConfigurationError("joint must name exactly two impairments")
            kwargs["joint"] = (joint[0], joint[1])
        if out_dir is not None:
            kwargs["out_dir"] = out_dir
        return cls(**kwargs)


# --- seed derivation ----------------------------------------------------------

class SeedBundle(NamedTuple):
    final: int
    env: int
    channel: int


def episode_seed(seed_base: int, episode: int) -> int:
    return seed_base + episode


def _impairment_code(impairment) -> int:
    if isinstance(impairment, tuple):
        a, b = impairment
        return len(DIMENSIONS) + 2 + DIMENSIONS.index(a) * len(DIMENSIONS) + DIMENSIONS.index(b)
    return DIMENSIONS.index(impairment)


def derive_seed(
    seed_base: int,
    task: str,
    impairment,
    level_code: int,
    episode: int,
) -> SeedBundle:
    """Condition seeds from a canonical mix of the condition identity.

    The method is deliberately excluded so that strategies face identical
    draws; the environment sub-stream is additionally level-free so that
    layouts stay fixed along a severity sweep.
    """
    h = mix64(episode_seed(seed_base, episode))
    h = mix64(h ^ (1 + TASKS.index(task)))
    layout = mix64(h ^ (1 + _impairment_code(impairment)))
    final = mix64(layout ^ (1 + level_code)) & MASK64
    return SeedBundle(
        final=final,
        env=substream_seed(layout, ENV_STREAM),
        channel=substream_seed(final, CHANNEL_STREAM),
    )


# --- sweep planning -----------------------------------------------------------

@dataclass(frozen=True)
class RunCondition:
    """One episode's identity within a sweep."""

    method: str           # method label as reported (may carry a lambda tag)
    strategy: str         # underlying strategy kind
    task: str
    impairment: str       # reported impairment label
    pipeline: tuple[ImpairmentSpec, ...]
    severity: float       # reported (primary) severity
    level_code: int
    episode: int
    lam: float
    seeds: SeedBundle


def _grid(dimension: str, levels: int) -> list[float]:
    smax = SIGMA_MAX[dimension]
    return [i * smax / (levels - 1) for i in range(levels)]


def _method_entries(config: BenchmarkConfig) -> list[tuple[str, str, float]]:
    """(label, strategy, lambda) triples; redundant fans out over lambdas."""
    entries = []
    for method in config.methods:
        if method == REDUNDANT and len(config.lambdas) > 1:
            for lam in config.lambdas:
                entries.append((f"{method}(l={lam:g})", method, lam))
        elif method == REDUNDANT:
            entries.append((method, method, config.lambdas[0]))
        else:
            entries.append((method, method, config.lambdas[0]))
    return entries


def plan_sweep(config: BenchmarkConfig) -> list[RunCondition]:
    """Deterministic canonical plan: method, task, impairment, level, episode."""
    plan: list[RunCondition] = []
    levels = config.levels
    for label, strategy, lam in _method_entries(config):
        for task in config.tasks:
            if config.joint is not None:
                dim_a, dim_b = config.joint
                grid_a, grid_b = _grid(dim_a, levels), _grid(dim_b, levels)
                for la, sev_a in enumerate(grid_a):
                    for lb, sev_b in enumerate(grid_b):
                        level_code = la * levels + lb
                        pipeline = (
                            ImpairmentSpec(dim_a, sev_a),
                            ImpairmentSpec(dim_b, sev_b),
                        )
                        impairment_label = f"{dim_a}+{dim_b}@{sev_b:g}"
                        for ep in range(config.episodes):
                            plan.append(RunCondition(
                                method=label, strategy=strategy, task=task,
                                impairment=impairment_label, pipeline=pipeline,
                                severity=sev_a, level_code=level_code, episode=ep,
                                lam=lam,
                                seeds=derive_seed(
                                    config.seed_base, task, config.joint, level_code, ep
                                ),
                            ))
            else:
                for dim in config.impairments:
                    for level, severity in enumerate(_grid(dim, levels)):
                        pipeline = (ImpairmentSpec(dim, severity),)
                        for ep in range(config.episodes):
                            plan.append(RunCondition(
                                method=label, strategy=strategy, task=task,
                                impairment=dim, pipeline=pipeline,
                                severity=severity, level_code=level, episode=ep,
                                lam=lam,
                                seeds=derive_seed(config.seed_base, task, dim, level, ep),
                            ))
    return plan


# --- execution ------------------------------------------------------------------

class ResultRow(NamedTuple):
    """One CSV row of the results file."""

    method: str
    task: str
    impairment: str
    severity: float
    episode: int
    seed: int
    score: float
    precision: Optional[float]
    recall: Optional[float]
    bits_per_step: float
    msgs_per_step: float
    failure_mode: str


def _execute(condition: RunCondition, config: BenchmarkConfig) -> ResultRow:
    runtime = StrategyRuntime(
        condition.strategy,
        StrategyParams(staleness_lambda=condition.lam),
        BudgetConfig(config.budget),
    )
    episode_config = EpisodeConfig(task=condition.task, seed=condition.seeds.final)
    try:
        result = run_episode(
            runtime,
            list(condition.pipeline),
            config.channel_params(),
            episode_config,
            env_seed=condition.seeds.env,
            chan_seed=condition.seeds.channel,
        )
    except Exception as exc:
        raise RuntimeError(f"episode failed for condition {condition}") from exc
    return ResultRow(
        method=condition.method,
        task=condition.task,
        impairment=condition.impairment,
        severity=condition.severity,
        episode=condition.episode,
        seed=condition.seeds.final,
        score=result.score,
        precision=result.precision,
        recall=result.recall,
        bits_per_step=result.bits_sent / result.steps,
        msgs_per_step=result.msgs_sent / result.steps,
        failure_mode="none",
    )


def _execute_chunk(args: tuple[list[RunCondition], BenchmarkConfig]) -> list[ResultRow]:
    conditions, config = args
    return [_execute(condition, config) for condition in conditions]


def run_all(plan: list[RunCondition], config: BenchmarkConfig) -> list[ResultRow]:
    """Execute every condition; output order is the canonical plan order for
    any thread count because each episode is self-seeded."""
    if not plan:
        return []
    threads = config.threads
    if threads <= 1:
        return [_execute(condition, config) for condition in plan]
    chunk_size = max(1, len(plan) // (threads * 8))
    chunks = [
        (plan[i:i + chunk_size], config) for i in range(0, len(plan), chunk_size)
    ]
    with Pool(processes=threads) as pool:
        parts = pool.map(_execute_chunk, chunks)
    return [row for part in parts for row in part]


# --- failure labelling -----------------------------------------------------------

def label_failures(rows: list[ResultRow]) -> list[ResultRow]:
    """Fill the failure_mode column from condition-level aggregates."""
    by_condition: dict[tuple, list[float]] = {}
    for row in rows:
        key = (row.task, row.impairment, row.severity, row.method)
        by_condition.setdefault(key, []).append(row.score)
    means = {key: sum(v) / len(v) for key, v in by_condition.items()}

    def condition_mean(task, impairment, severity, method):
        return means.get((task, impairment, severity, method))

    labelled = []
    for row in rows:
        key = (row.task, row.impairment, row.severity)
        single_copy_means = [
            m for m in (condition_mean(*key, method) for method in SINGLE_COPY)
            if m is not None
        ]
        is_redundant = row.method.startswith(REDUNDANT)
        ctx = ConditionContext(
            task=row.task,
            # lambda-tagged redundant labels classify as the redundant strategy
            method=REDUNDANT if is_redundant else row.method,
            severity=row.severity,
            no_comm_mean=condition_mean(*key, "no_comm"),
            best_single_copy_mean=max(single_copy_means) if single_copy_means else None,
            redundant_mean=condition_mean(*key, row.method) if is_redundant else None,
        )
        labelled.append(
            row._replace(failure_mode=classify_failure(row.score, row.precision, ctx))
        )
    return labelled


# --- persistence ------------------------------------------------------------------

def _fmt(value: Optional[float]) -> str:
    return "" if value is None else f"{value:.6f}"


def rows_to_csv(rows: list[ResultRow]) -> str:
    out = io.StringIO()
    out.write(CSV_HEADER + "\n")
    for r in rows:
        out.write(
            f"{r.method},{r.task},{r.impairment},{_fmt(r.severity)},{r.episode},"
            f"{r.seed},{_fmt(r.score)},{_fmt(r.precision)},{_fmt(r.recall)},"
            f"{_fmt(r.bits_per_step)},{_fmt(r.msgs_per_step)},{r.failure_mode}\n"
        )
    return out.getvalue()


def write_csv(rows: list[ResultRow], path: Path) -> None:
    path.parent.mkdir(parents=True, exist_ok=True)
    path.write_text(rows_to_csv(rows), encoding="utf-8")


def read_csv(path: Path) -> list[ResultRow]:
    rows: list[ResultRow] = []
    with path.open(newline="", encoding="utf-8") as handle:
        reader = csv.DictReader(handle)
        expected = CSV_HEADER.split(",")
        if reader.fieldnames != expected:
            raise ConfigurationError(
                f"results file {path} has columns {reader.fieldnames}, expected {expected}"
            )
        for record in reader:
            rows.append(ResultRow(
                method=record["method"],
                task=record["task"],
                impairment=record["impairment"],
                severity=float(record["severity"]),
                episode=int(record["episode"]),
                seed=int(record["seed"]),
                score=float(record["score"]),
                precision=float(record["precision"]) if record["precision"] else None,
                recall=float(record["recall"]) if record["recall"] else None,
                bits_per_step=float(record["bits_per_step"]),
                msgs_per_step=float(record["msgs_per_step"]),
                failure_mode=record["failure_mode"],
            ))
    return rows


# --- aggregation -------------------------------------------------------------------

def _round6(value: Optional[float]) -> Optional[float]:
    return None if value is None else round(value, 6)


def summarize(rows: list[ResultRow], config: Optional[BenchmarkConfig] = None,
              runtime_ms: int = 0) -> dict:
    """Condition-level summary: curves, NPD at max severity, AURC, ranks,
    failure-mode counts. Pure function of the rows (plus config echo)."""
    failures: dict[tuple, dict[str, int]] = {}
    for row in rows:
        key = (row.task, row.impairment, row.method)
        failures.setdefault(key, {})
        if row.failure_mode and row.failure_mode != "none":
            failures[key][row.failure_mode] = failures[key].get(row.failure_mode, 0) + 1

    by_severity: dict[tuple, dict[float, list[float]]] = {}
    for row in rows:
        key = (row.task, row.impairment, row.method)
        by_severity.setdefault(key, {}).setdefault(row.severity, []).append(row.score)

    curves: dict[tuple, RobustnessCurve] = {}
    for key, level_scores in by_severity.items():
        task, impairment, method = key
        points = []
        for severity in sorted(level_scores):
            mean, std = mean_std(level_scores[severity])
            points.append(CurvePoint(severity, mean, std, len(level_scores[severity])))
        curves[key] = RobustnessCurve(method, task, impairment, tuple(points))

    # rank tables per (task, impairment) at clean and max severity
    clean_ranks: dict[tuple, dict[str, int]] = {}
    worst_ranks: dict[tuple, dict[str, int]] = {}
    groups: dict[tuple, list[str]] = {}
    for task, impairment, method in curves:
        groups.setdefault((task, impairment), []).append(method)
    for group, methods in groups.items():
        if len(methods) < 2:
            continue
        clean_scores = {m: curves[(*group, m)].points[0].mean for m in methods}
        worst_scores = {m: curves[(*group, m)].points[-1].mean for m in methods}
        clean_ranks[group] = rank_table(clean_scores)
        worst_ranks[group] = rank_table(worst_scores)

    conditions = []
    for key in sorted(curves):
        task, impairment, method = key
        curve = curves[key]
        clean = curve.points[0].mean
        try:
            npd_max = npd(clean, curve.points[-1].mean)
        except ValueError:
            npd_max = None
        try:
            curve_aurc = aurc(curve)
        except ValueError:
            curve_aurc = None
        group = (task, impairment)
        deltas = (
            rank_stability(clean_ranks[group], worst_ranks[group])
            if group in clean_ranks
            else None
        )
        conditions.append({
            "task": task,
            "impairment": impairment,
            "method": method,
            "curve": [
                {
                    "severity": _round6(p.severity),
                    "mean": _round6(p.mean),
                    "std": _round6(p.std),
                    "n": p.n,
                }
                for p in curve.points
            ],
            "clean_mean": _round6(clean),
            "npd_max": _round6(npd_max),
            "aurc": _round6(curve_aurc),
            "clean_rank": clean_ranks.get(group, {}).get(method),
            "worst_rank": worst_ranks.get(group, {}).get(method),
            "rank_delta": deltas.get(method) if deltas else None,
            "failure_modes": dict(sorted(failures.get(key, {}).items())),
        })

    meta = {
        "version": __version__,
        "config": config.to_dict() if config else None,
        "runtime_ms": runtime_ms,
    }
    return {"meta": meta, "conditions": conditions}


def write_summary_json(summary: dict, path: Path) -> None:
    path.parent.mkdir(parents=True, exist_ok=True)
    path.write_text(json.dumps(summary, indent=2) + "\n", encoding="utf-8")


# --- per-figure data tables ---------------------------------------------------------

def figure_tables(summary: dict) -> dict[str, str]:
    """CSV data tables backing each figure kind, keyed by file name."""
    conditions = summary["conditions"]

    curves = ["task,impairment,method,severity,mean,std,n"]
    for cond in conditions:
        for point in cond["curve"]:
            curves.append(
                f"{cond['task']},{cond['impairment']},{cond['method']},"
                f"{point['severity']:.6f},{point['mean']:.6f},{point['std']:.6f},{point['n']}"
            )

    heatmap = ["task,impairment,method,npd_max"]
    ranks = ["task,impairment,method,clean_rank,worst_rank,rank_delta"]
    aurc_rows = ["task,impairment,method,aurc"]
    for cond in conditions:
        base = f"{cond['task']},{cond['impairment']},{cond['method']}"
        npd_max = cond["npd_max"]
        heatmap.append(f"{base},{'' if npd_max is None else f'{npd_max:.6f}'}")
        ranks.append(
            f"{base},{cond['clean_rank'] or ''},{cond['worst_rank'] or ''},"
            f"{'' if cond['rank_delta'] is None else cond['rank_delta']}"
        )
        value = cond["aurc"]
        aurc_rows.append(f"{base},{'' if value is None else f'{value:.6f}'}")

    radar_acc: dict[tuple[str, str], list[float]] = {}
    for cond in conditions:
        if cond["npd_max"] is not None:
            radar_acc.setdefault((cond["method"], cond["impairment"]), []).append(cond["npd_max"])
    radar = ["method,impairment,mean_npd_max"]
    for (method, impairment), values in sorted(radar_acc.items()):
        radar.append(f"{method},{impairment},{sum(values) / len(values):.6f}")

    return {
        "curves.csv": "\n".join(curves) + "\n",
        "heatmap.csv": "\n".join(heatmap) + "\n",
        "ranks.csv": "\n".join(ranks) + "\n",
        "aurc.csv": "\n".join(aurc_rows) + "\n",
        "radar.csv": "\n".join(radar) + "\n",
    }


def write_figure_tables(summary: dict, out_dir: Path) -> list[Path]:
    out_dir.mkdir(parents=True, exist_ok=True)
    written = []
    for name, content in figure_tables(summary).items():
        path = out_dir / name
        path.write_text(content, encoding="utf-8")
        written.append(path)
    return written


# --- top-level entry points -----------------------------------------------------------

def run_benchmark(config: BenchmarkConfig) -> tuple[Path, Path]:
    """Plan, execute, label, and persist a sweep; returns the output paths."""
    started = time.perf_counter()
    plan = plan_sweep(config)
    rows = label_failures(run_all(plan, config))
    runtime_ms = int((time.perf_counter() - started) * 1000)
    out_dir = Path(config.out_dir)
    results_path = out_dir / RESULTS_FILE
    write_csv(rows, results_path)
    summary = summarize(rows, config, runtime_ms)
    summary_path = out_dir / SUMMARY_FILE
    write_summary_json(summary, summary_path)
    return results_path, summary_path


def run_report(results_dir: Path, out_dir: Optional[Path] = None) -> list[Path]:
    """Summarize an existing results file and emit per-figure data tables."""
    results_path = results_dir / RESULTS_FILE if results_dir.is_dir() else results_dir
    rows = read_csv(results_path)
    out = out_dir or results_path.parent
    summary = summarize(rows)
    summary_path = out / SUMMARY_FILE
    write_summary_json(summary, summary_path)
    return [summary_path] + write_figure_tables(summary, out)
