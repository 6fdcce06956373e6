"""Robustness metrics over episode results: NPD, curves, AURC, rank stability.

All functions are pure and order-independent: shuffling episode records before
aggregation yields identical curves and summaries.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Optional, Sequence


class UndefinedMetricError(ValueError):
    """A metric is undefined for the given inputs (e.g., zero clean mean)."""


@dataclass(frozen=True)
class CurvePoint:
    severity: float
    mean: float
    std: float
    n: int


@dataclass(frozen=True)
class RobustnessCurve:
    """Performance versus severity for one (method, task, impairment)."""

    method: str
    task: str
    impairment: str
    points: tuple[CurvePoint, ...]

    def __post_init__(self):
        severities = [p.severity for p in self.points]
        if severities != sorted(set(severities)):
            raise ValueError("curve severities must be strictly increasing")
        if self.points and self.points[0].severity != 0:
            raise ValueError("curve must start at severity 0")

    @property
    def clean_mean(self) -> float:
        return self.points[0].mean


def mean_std(samples: Sequence[float]) -> tuple[float, float]:
    """Arithmetic mean and sample standard deviation (n-1 denominator)."""
    n = len(samples)
    if n == 0:
        raise ValueError("mean_std needs at least one sample")
    mean = sum(samples) / n
    if n == 1:
        return mean, 0.0
    var = sum((x - mean) ** 2 for x in samples) / (n - 1)
    return mean, math.sqrt(var)


def npd(clean_mean: float, degraded_mean: float) -> float:
    """Normalized performance drop: percent of clean performance lost.

    Negative when performance improves under impairment; undefined (raises)
    for non-positive clean performance.
    """
    if clean_mean <= 0:
        raise UndefinedMetricError("NPD undefined for non-positive clean performance")
    return 100.0 * (clean_mean - degraded_mean) / clean_mean


def aurc(curve: RobustnessCurve) -> float:
    """Area under the robustness curve, percent of the clean * [0,1] rectangle.

    Trapezoidal integration over severity normalized to [0, 1]; a flat curve
    scores exactly 100 by construction.
    """
    points = curve.points
    if len(points) < 2:
        raise UndefinedMetricError("AURC needs at least two curve points")
    clean = points[0].mean
    if clean <= 0:
        raise UndefinedMetricError("AURC undefined for non-positive clean performance")
    span = points[-1].severity
    xs = [p.severity / span for p in points]
    area = _trapezoid(xs, [p.mean for p in points])
    norm = _trapezoid(xs, [clean] * len(points))
    return 100.0 * area / norm


def _trapezoid(xs: list[float], ys: list[float]) -> float:
    total = 0.0
    for i in range(len(xs) - 1):
        total += (xs[i + 1] - xs[i]) * (ys[i] + ys[i + 1]) / 2.0
    return total


RANK_TIE_TOL = 1e-9


def rank_table(scores: dict[str, float], tol: float = RANK_TIE_TOL) -> dict[str, int]:
    """Competition ranking of methods by descending mean score.

    Methods whose means differ by less than tol tie and share the minimum
    rank of their group (1-2-2-4 convention).
    """
    if len(scores) < 2:
        raise ValueError("rank_table needs at least two methods")
    ordered = sorted(scores.items(), key=lambda kv: (-kv[1], kv[0]))
    ranks: dict[str, int] = {}
    group_rank = 1
    group_score = ordered[0][1]
    for position, (method, score) in enumerate(ordered, start=1):
        if group_score - score >= tol:
            group_rank = position
            group_score = score
        ranks[method] = group_rank
    return ranks


def rank_stability(clean: dict[str, int], worst: dict[str, int]) -> dict[str, int]:
    """Rank delta per method between clean and maximum-severity conditions."""
    if set(clean) != set(worst):
        raise ValueError("rank tables cover different method sets")
    return {method: worst[method] - clean[method] for method in clean}


# Rule-based failure-mode counters. Thresholds are reporting heuristics only;
# they never feed scoring.
WAYPOINT_LOSS_MARGIN = 2.0
HALLUCINATION_PRECISION = 0.5
ISOLATION_FACTOR = 1.8


@dataclass(frozen=True)
class ConditionContext:
    """Condition-level aggregates needed to label a single episode."""

    task: str
    method: str
    severity: float
    no_comm_mean: Optional[float] = None
    best_single_copy_mean: Optional[float] = None
    redundant_mean: Optional[float] = None


def classify_failure(score: float, precision: Optional[float], ctx: ConditionContext) -> str:
    """Label an episode with its dominant failure mode, if any.

    Clean conditions and the no-communication baseline always label "none";
    the counters describe how communication fails, not how its absence does.
    """
    if ctx.severity <= 0 or ctx.method == "no_comm":
        return "none"
    if (
        ctx.task == "nav"
        and ctx.no_comm_mean is not None
        and score <= ctx.no_comm_mean + WAYPOINT_LOSS_MARGIN
    ):
        return "waypoint-loss"
    if ctx.task == "cp" and precision is not None and precision < HALLUCINATION_PRECISION:
        return "hallucination"
    if (
        ctx.method == "redundant"
        and ctx.best_single_copy_mean is not None
        and ctx.redundant_mean is not None
        and ctx.best_single_copy_mean > 0
        and ctx.redundant_mean >= ISOLATION_FACTOR * ctx.best_single_copy_mean
    ):
        return "graceful-isolation"
    return "none"
