#!/usr/bin/env python3
"""Staleness-decay ablation for the redundant strategy on CP under stale memory.

The element-wise-maximum fusion binarizes buffered detections before any
weight scaling, so the decay value cannot change task outcomes; this script
demonstrates that the rows are identical.
"""

import statistics
import sys

from commstress.channel import ChannelParams, ImpairmentSpec
from commstress.harness import derive_seed
from commstress.strategies import StrategyParams, StrategyRuntime
from commstress.tasks import EpisodeConfig, run_episode

EPISODES = 30
STALE_LEVELS = {0: 0.0, 2: 4.0, 4: 8.0, 6: 12.0, 10: 20.0}
PARAMS = ChannelParams()


def condition_mean(lam, level, severity):
    runtime = StrategyRuntime("redundant", StrategyParams(staleness_lambda=lam))
    scores = []
    for episode in range(EPISODES):
        seeds = derive_seed(42, "cp", "stale", level, episode)
        result = run_episode(
            runtime,
            [ImpairmentSpec("stale", severity)],
            PARAMS,
            EpisodeConfig(task="cp", seed=seeds.final),
            env_seed=seeds.env,
            chan_seed=seeds.channel,
        )
        scores.append(result.score)
    return statistics.mean(scores)


def main() -> int:
    header = f"{'lambda':>6s}" + "".join(f"  stale={s:<5.0f}" for s in STALE_LEVELS.values())
    print(header)
    rows = []
    for lam in (0.0, 0.3, 1.0, 2.0):
        row = [condition_mean(lam, lvl, sev) for lvl, sev in STALE_LEVELS.items()]
        rows.append(row)
        print(f"{lam:6.1f}" + "".join(f"{100 * v:12.1f}" for v in row))
    identical = all(row == rows[0] for row in rows)
    print(f"rows identical across lambda: {identical}")
    return 0 if identical else 1


if __name__ == "__main__":
    sys.exit(main())
