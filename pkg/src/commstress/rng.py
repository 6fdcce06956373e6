"""Deterministic pseudo-random streams shared by the channel, tasks, and harness.

All randomness in the benchmark flows through SplitMix64 so that a run is
reproducible bit-for-bit from its seeds, independent of host, thread count, and
library versions. The generator is counter-based (state advances by a fixed
odd constant per draw), which lets us draw blocks of uniforms with vectorized
uint64 arithmetic while staying on the exact same stream as the scalar path.
"""

from __future__ import annotations

import numpy as np

MASK64 = (1 << 64) - 1
GAMMA = 0x9E3779B97F4A7C15

_MIX_MUL_1 = 0xBF58476D1CE4E5B9
_MIX_MUL_2 = 0x94D049BB133111EB
_TWO_NEG_53 = 2.0 ** -53


def mix64(z: int) -> int:
    """SplitMix64 finalizer: avalanche a 64-bit value."""
    z &= MASK64
    z = ((z ^ (z >> 30)) * _MIX_MUL_1) & MASK64
    z = ((z ^ (z >> 27)) * _MIX_MUL_2) & MASK64
    return (z ^ (z >> 31)) & MASK64


def _mix64_array(z: np.ndarray) -> np.ndarray:
    # uint64 arithmetic wraps mod 2**64, matching the masked scalar path.
    z = (z ^ (z >> np.uint64(30))) * np.uint64(_MIX_MUL_1)
    z = (z ^ (z >> np.uint64(27))) * np.uint64(_MIX_MUL_2)
    return z ^ (z >> np.uint64(31))


def substream_seed(seed: int, index: int) -> int:
    """Derive the seed of sub-stream `index` (0, 1, ...) from a parent seed."""
    return mix64((seed + (index + 1) * GAMMA) & MASK64)


class SplitMix64:
    """SplitMix64 generator with scalar and block drawing on one stream."""

    __slots__ = ("_state",)

    def __init__(self, seed: int):
        self._state = seed & MASK64

    @property
    def state(self) -> int:
        return self._state

    def next_u64(self) -> int:
        self._state = (self._state + GAMMA) & MASK64
        return mix64(self._state)

    def next_float(self) -> float:
        """Uniform double in [0, 1): top 53 bits scaled by 2**-53."""
        return (self.next_u64() >> 11) * _TWO_NEG_53

    def next_below(self, n: int) -> int:
        """Uniform integer in [0, n)."""
        return int(self.next_float() * n)

    def block(self, k: int) -> np.ndarray:
        """Draw `k` uniform doubles in [0, 1) as one vectorized batch.

        Produces exactly the values `k` successive next_float() calls would,
        and leaves the stream in the same position.
        """
        if k == 0:
            return np.empty(0, dtype=np.float64)
        counters = np.uint64(self._state) + np.uint64(GAMMA) * np.arange(
            1, k + 1, dtype=np.uint64
        )
        self._state = (self._state + k * GAMMA) & MASK64
        return (_mix64_array(counters) >> np.uint64(11)) * _TWO_NEG_53

    def spawn(self, index: int) -> "SplitMix64":
        """Independent child stream; never advances this stream."""
        return SplitMix64(substream_seed(self._state, index))

    def sample_without_replacement(self, n: int, k: int) -> list[int]:
        """k distinct integers from [0, n), by partial Fisher-Yates; k draws."""
        pool = list(range(n))
        for i in range(k):
            j = i + self.next_below(n - i)
            pool[i], pool[j] = pool[j], pool[i]
        return pool[:k]

    def shuffle(self, items: list) -> None:
        """In-place Fisher-Yates shuffle; len(items) - 1 draws."""
        for i in range(len(items) - 1, 0, -1):
            j = self.next_below(i + 1)
            items[i], items[j] = items[j], items[i]
