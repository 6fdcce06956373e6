#!/usr/bin/env python3
"""NAV waypoint completion under independent vs bursty packet loss.

Compares full_comm and redundant at 0/40/80 percent loss for the Bernoulli
model and a Gilbert-Elliott channel with burstiness 0.9, over 30 episodes
seeded exactly as the default sweep seeds them.
"""

import statistics
import sys

from commstress.channel import ChannelParams, ImpairmentSpec
from commstress.harness import derive_seed
from commstress.strategies import StrategyRuntime
from commstress.tasks import EpisodeConfig, run_episode

EPISODES = 30
LEVELS = {0: 0.0, 5: 40.0, 10: 80.0}


def condition_mean(method, params, level, severity):
    runtime = StrategyRuntime(method)
    scores = []
    for episode in range(EPISODES):
        seeds = derive_seed(42, "nav", "packet_loss", level, episode)
        result = run_episode(
            runtime,
            [ImpairmentSpec("packet_loss", severity)],
            params,
            EpisodeConfig(task="nav", seed=seeds.final),
            env_seed=seeds.env,
            chan_seed=seeds.channel,
        )
        scores.append(result.score)
    return statistics.mean(scores)


def main() -> int:
    channels = {
        "bernoulli (b=0)": ChannelParams(),
        "bursty (b=0.9)": ChannelParams(loss_model="gilbert_elliott", burstiness=0.9),
    }
    print(f"{'channel':18s} {'method':12s}" + "".join(f"{s:>8.0f}%" for s in LEVELS.values()))
    for name, params in channels.items():
        for method in ("full_comm", "redundant"):
            row = [condition_mean(method, params, lvl, sev) for lvl, sev in LEVELS.items()]
            print(f"{name:18s} {method:12s}" + "".join(f"{v:9.1f}" for v in row))
    no_comm = condition_mean("no_comm", ChannelParams(), 0, 0.0)
    print(f"{'no_comm floor':18s} {'':12s}{no_comm:9.1f} (loss-independent)")
    return 0


if __name__ == "__main__":
    sys.exit(main())
