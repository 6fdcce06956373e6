#!/usr/bin/env python3
"""NAV completion under a common per-step bit budget.

At 1x the redundant strategy must halve its payload to afford two copies
(waypoints past dimension 200 become invisible); at 2x it duplicates the full
payload. Single-copy strategies always send the full 400 dimensions.
"""

import statistics
import sys

from commstress.channel import ChannelParams, ImpairmentSpec
from commstress.harness import derive_seed
from commstress.strategies import BudgetConfig, StrategyParams, StrategyRuntime
from commstress.tasks import EpisodeConfig, run_episode

EPISODES = 30
LEVELS = {0: 0.0, 5: 40.0, 10: 80.0}
PARAMS = ChannelParams()


def condition_mean(method, budget, level, severity):
    runtime = StrategyRuntime(method, StrategyParams(), BudgetConfig(budget))
    scores = []
    for episode in range(EPISODES):
        seeds = derive_seed(42, "nav", "packet_loss", level, episode)
        result = run_episode(
            runtime,
            [ImpairmentSpec("packet_loss", severity)],
            PARAMS,
            EpisodeConfig(task="nav", seed=seeds.final),
            env_seed=seeds.env,
            chan_seed=seeds.channel,
        )
        scores.append(result.score)
    return statistics.mean(scores)


def main() -> int:
    print(f"{'budget':8s} {'method':12s} {'dims':>5s}" + "".join(f"{s:>8.0f}%" for s in LEVELS.values()))
    for budget in ("1x", "2x"):
        for method in ("full_comm", "compressed", "redundant"):
            dims = 200 if (method == "redundant" and budget == "1x") else 400
            row = [condition_mean(method, budget, lvl, sev) for lvl, sev in LEVELS.items()]
            print(f"{budget:8s} {method:12s} {dims:5d}" + "".join(f"{v:9.1f}" for v in row))
    return 0


if __name__ == "__main__":
    sys.exit(main())
