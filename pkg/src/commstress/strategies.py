"""Communication strategies: send policies, receive-side fusion, bit accounting.

Five strategies share one interface: decide whether to transmit, transform
the outgoing payload, and fold received payloads into agent knowledge.

  no_comm          never transmits
  full_comm        full 400-dim float payload every step
  compressed       4-bit quantized payload every step
  event_triggered  full payload, but only when its L1 norm exceeds a threshold
  redundant        two copies of every message plus staleness-aware fusion
                   of a per-neighbor receive buffer
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .channel import CommChannel, MessageEnvelope, PAYLOAD_DIM

NO_COMM = "no_comm"
FULL_COMM = "full_comm"
COMPRESSED = "compressed"
EVENT_TRIGGERED = "event_triggered"
REDUNDANT = "redundant"

STRATEGIES = (NO_COMM, FULL_COMM, COMPRESSED, EVENT_TRIGGERED, REDUNDANT)

SINGLE_COPY = (FULL_COMM, COMPRESSED, EVENT_TRIGGERED)

QUANT_LEVELS = 15
EVENT_THRESHOLD = 0.5
DEFAULT_LAMBDA = 0.3
REDUNDANT_COPIES = 2

BITS_FULL_PRECISION = 32
BITS_COMPRESSED = 4


@dataclass(frozen=True)
class StrategyParams:
    """Fixed strategy constants, overridable only where the sweep varies them."""

    event_threshold: float = EVENT_THRESHOLD
    staleness_lambda: float = DEFAULT_LAMBDA
    copies: int = REDUNDANT_COPIES


def quantize4(payload: np.ndarray) -> np.ndarray:
    """Quantize entries in [0, 1] to 15 levels (4 bits), half rounding up."""
    return np.floor(payload * QUANT_LEVELS + 0.5) / QUANT_LEVELS


def event_trigger(payload: np.ndarray, threshold: float = EVENT_THRESHOLD) -> bool:
    """Transmit only when the payload's L1 norm exceeds the threshold."""
    return float(np.sum(np.abs(payload))) > threshold


def redundant_send(
    payload: np.ndarray, sender: int, receiver: int, step: int
) -> tuple[MessageEnvelope, MessageEnvelope]:
    """Two envelopes with identical payload and timestamp.

    Each traverses the channel independently, so at loss rate p both copies
    drop with probability p**2.
    """
    return (
        MessageEnvelope(payload, sender, receiver, step),
        MessageEnvelope(payload, sender, receiver, step),
    )


@dataclass
class RedundantState:
    """Per-neighbor receive buffer and age counters (one receiving agent)."""

    dim: int = PAYLOAD_DIM
    buffers: dict[int, np.ndarray] = field(default_factory=dict)
    ages: dict[int, int] = field(default_factory=dict)

    def ensure(self, neighbor: int) -> None:
        if neighbor not in self.buffers:
            self.buffers[neighbor] = np.zeros(self.dim)
            self.ages[neighbor] = 0


def redundant_receive(
    state: RedundantState,
    neighbor: int,
    copy1: np.ndarray | None,
    copy2: np.ndarray | None,
) -> None:
    """Fold this step's copies from a neighbor into the receive buffer.

    Copy 1 wins when both arrive; with neither, the buffer keeps the most
    recent received state and the age counter increments.
    """
    state.ensure(neighbor)
    accepted = copy1 if copy1 is not None else copy2
    if accepted is not None:
        state.buffers[neighbor] = accepted
        state.ages[neighbor] = 0
    else:
        state.ages[neighbor] += 1


def staleness_weights(ages, lam: float) -> np.ndarray:
    """Normalized inverse-staleness weights exp(-lam * age) / sum."""
    ages = np.asarray(ages, dtype=np.float64)
    if ages.size == 0:
        raise ValueError("staleness_weights needs at least one neighbor")
    scaled = np.exp(-lam * (ages - ages.min()))
    return scaled / scaled.sum()


def redundant_fuse(
    buffers: list[np.ndarray], weights: np.ndarray, local_knowledge: np.ndarray
) -> np.ndarray:
    """Staleness-aware fusion: max(local, max_j(w_j * buffer_j))."""
    fused = local_knowledge
    for weight, buf in zip(weights, buffers):
        fused = np.maximum(fused, weight * buf)
    return fused


def redundant_detection_union(
    buffers: list[np.ndarray], local_knowledge: np.ndarray, threshold: float = 0.5
) -> np.ndarray:
    """Detection-set fusion: buffers binarized at the threshold before any
    weight scaling, so positive rescaling can never flip a detection and the
    decision output is identical for every staleness-decay value."""
    detected = local_knowledge.copy()
    for buf in buffers:
        np.maximum(detected, buf > threshold, out=detected)
    return detected


# --- bandwidth budgets -------------------------------------------------------

BUDGET_NONE = "none"
BUDGET_1X = "1x"
BUDGET_2X = "2x"
BUDGETS = (BUDGET_NONE, BUDGET_1X, BUDGET_2X)

BUDGET_HALF_DIM = PAYLOAD_DIM // 2


@dataclass(frozen=True)
class BudgetConfig:
    """Per-step bit budget as a multiple of the single-copy full payload."""

    multiplier: str = BUDGET_NONE

    def __post_init__(self):
        if self.multiplier not in BUDGETS:
            raise ValueError(f"unknown budget multiplier: {self.multiplier!r}")

    def redundant_dims(self) -> int:
        """Payload dimensions a redundant copy may carry under this budget."""
        return BUDGET_HALF_DIM if self.multiplier == BUDGET_1X else PAYLOAD_DIM


def enforce_budget(strategy: str, budget: BudgetConfig):
    """Payload transform imposed by the budget; identity except for the
    redundant strategy at 1x, whose copies keep only the first half of the
    payload (waypoints indexed past the cut become undecodable)."""
    if strategy == REDUNDANT and budget.multiplier == BUDGET_1X:
        dims = budget.redundant_dims()

        def truncate(payload: np.ndarray) -> np.ndarray:
            out = payload.copy()
            out[dims:] = 0.0
            return out

        return truncate
    return lambda payload: payload


def bits_accounting(strategy: str, msgs_sent: int, dims: int = PAYLOAD_DIM) -> int:
    """Total bits for a message count; redundant copies are counted as
    individual messages by the caller."""
    if strategy == NO_COMM:
        return 0
    per_value = BITS_COMPRESSED if strategy == COMPRESSED else BITS_FULL_PRECISION
    return msgs_sent * dims * per_value


# --- episode-facing runtime ---------------------------------------------------

class StrategyRuntime:
    """A strategy bound to its parameters and budget for one episode."""

    def __init__(
        self,
        kind: str,
        params: StrategyParams | None = None,
        budget: BudgetConfig | None = None,
    ):
        if kind not in STRATEGIES:
            raise ValueError(f"unknown strategy: {kind!r}")
        self.kind = kind
        self.params = params or StrategyParams()
        self.budget = budget or BudgetConfig()
        self.copies = self.params.copies if kind == REDUNDANT else 1
        self._budget_transform = enforce_budget(kind, self.budget)
        self._message_dims = (
            self.budget.redundant_dims() if kind == REDUNDANT else PAYLOAD_DIM
        )

    def prepare(self, payload: np.ndarray) -> np.ndarray:
        """Outgoing payload after strategy encoding and budget enforcement."""
        if self.kind == COMPRESSED:
            return quantize4(payload)
        return self._budget_transform(payload)

    def should_send(self, outgoing: np.ndarray) -> bool:
        if self.kind == NO_COMM:
            return False
        if self.kind == EVENT_TRIGGERED:
            return event_trigger(outgoing, self.params.event_threshold)
        return True

    def bits_per_message(self) -> int:
        return bits_accounting(self.kind, 1, self._message_dims)

    def broadcast(
        self, channel: CommChannel, payload: np.ndarray, sender: int,
        receivers, step: int,
    ) -> int:
        """Send one payload to each receiver (both copies when redundant);
        returns the number of messages put on the wire."""
        outgoing = self.prepare(payload)
        if not self.should_send(outgoing):
            return 0
        sent = 0
        for receiver in receivers:
            for _ in range(self.copies):
                channel.send(outgoing, sender, receiver, step)
                sent += 1
        return sent
