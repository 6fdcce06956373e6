"""Configurable message-impairment channel for inter-agent communication.

Every message travels through up to two impairment stages drawn from six
dimensions, applied in a fixed order:

    conflict -> bandwidth -> loss -> latency (enqueue) -> async (offset)
    -> stale (receiver-side cache)

Content corruption (conflict) precedes transport so that it models
sender/sensor-side faults; the stale stage lives at the receiver because it
models a belief cache that fails to refresh. A channel instance owns all
per-link mutable state (delay queues, Gilbert-Elliott Markov state, stale
caches, sent-payload history) and is confined to a single episode.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import NamedTuple, Optional

import numpy as np

from .rng import SplitMix64

PAYLOAD_DIM = 400
TIMESTAMP_MOD = 1 << 16

DIMENSIONS = ("latency", "packet_loss", "bandwidth", "async", "stale", "conflict")

SIGMA_MAX = {
    "latency": 500.0,     # ms
    "packet_loss": 80.0,  # percent
    "bandwidth": 100.0,   # percent capacity reduction
    "async": 10.0,        # steps
    "stale": 20.0,        # steps
    "conflict": 40.0,     # percent
}

# Belief-drift model for stale caches, per non-refresh step: each cached
# detection relocates to a random cell with probability STALE_DRIFT_PROB,
# each empty cell hallucinates ghost evidence (value STALE_GHOST_VALUE) with
# probability STALE_GHOST_PROB, and with probability STALE_BLACKOUT_PROB the
# link yields nothing at all for the step (stale memory models links that
# intermittently fail). Endpoint-calibrated tunables; the refresh schedule,
# not these constants, is what the stale severity controls.
STALE_DRIFT_PROB = 0.9
STALE_GHOST_PROB = 0.05
STALE_GHOST_VALUE = 0.9
STALE_BLACKOUT_PROB = 0.5

SEVERITY_LEVELS = 11


class ConfigurationError(ValueError):
    """Invalid benchmark or channel configuration."""


def severity_grid(dimension: str) -> list[float]:
    """11 evenly spaced severities from 0 to the dimension's maximum."""
    try:
        smax = SIGMA_MAX[dimension]
    except KeyError:
        raise ConfigurationError(f"unknown impairment dimension: {dimension!r}")
    return [i * smax / 10 for i in range(SEVERITY_LEVELS)]


@dataclass(frozen=True)
class ImpairmentSpec:
    """One impairment dimension at a scalar severity."""

    dimension: str
    severity: float

    def __post_init__(self):
        if self.dimension not in SIGMA_MAX:
            raise ConfigurationError(f"unknown impairment dimension: {self.dimension!r}")
        smax = SIGMA_MAX[self.dimension]
        if not 0.0 <= self.severity <= smax:
            raise ConfigurationError(
                f"{self.dimension} severity {self.severity} outside [0, {smax}]"
            )


@dataclass(frozen=True)
class ChannelParams:
    """Loss-model parameters shared by every link of a channel."""

    loss_model: str = "bernoulli"  # "bernoulli" | "gilbert_elliott"
    burstiness: float = 0.0       # b: per-transmission state persistence
    good_loss: float = 0.02
    bad_loss: float = 0.95
    step_ms: float = 40.0

    def __post_init__(self):
        if self.loss_model not in ("bernoulli", "gilbert_elliott"):
            raise ConfigurationError(f"unknown loss model: {self.loss_model!r}")
        if not 0.0 <= self.burstiness < 1.0:
            raise ConfigurationError("burstiness must be in [0, 1)")
        if not self.good_loss < self.bad_loss:
            raise ConfigurationError("good_loss must be < bad_loss")
        if self.step_ms <= 0:
            raise ConfigurationError("step_ms must be positive")


@dataclass
class MessageEnvelope:
    """A payload in transit between agents.

    The timestamp is a 16-bit wrapping copy of the send step; receivers
    estimate message age as (local_step - timestamp) mod 2**16.
    """

    payload: np.ndarray
    sender: int
    receiver: int
    send_step: int
    timestamp: int = -1

    def __post_init__(self):
        if self.timestamp < 0:
            self.timestamp = self.send_step % TIMESTAMP_MOD


def message_age(local_step: int, timestamp: int) -> int:
    """Receiver-side age estimate with 16-bit wraparound."""
    return (local_step - timestamp) % TIMESTAMP_MOD


class TransmitOutcome(NamedTuple):
    delivered: bool
    due_step: int
    payload: Optional[np.ndarray]


DROPPED = TransmitOutcome(False, -1, None)


# --- stage primitives -------------------------------------------------------

def latency_steps(sigma_ms: float, step_ms: float) -> int:
    """Whole decision steps of delay for a latency severity."""
    if step_ms <= 0:
        raise ConfigurationError("step_ms must be positive")
    if sigma_ms < 0:
        raise ConfigurationError("latency severity must be non-negative")
    return int(sigma_ms // step_ms)


def bernoulli_drop(p: float, rng: SplitMix64) -> bool:
    """True (dropped) with probability p; consumes exactly one draw."""
    return rng.next_float() < p


GOOD, BAD = 0, 1


def ge_calibrate(
    target_p: float, b: float, good_loss: float = 0.02, bad_loss: float = 0.95
) -> tuple[float, float]:
    """Gilbert-Elliott transition probabilities (p_good_to_bad, p_bad_to_good).

    Bad-state persistence is exactly b, and the stationary loss rate equals
    target_p. Raises when the target is unreachable for the given states.
    """
    if not 0.0 <= b < 1.0:
        raise ConfigurationError("burstiness must be in [0, 1)")
    if not good_loss < bad_loss:
        raise ConfigurationError("good_loss must be < bad_loss")
    max_target = good_loss + (bad_loss - good_loss) / (2.0 - b)
    if target_p < good_loss or target_p > max_target:
        raise ConfigurationError(
            f"loss target {target_p} unreachable for burstiness {b}; "
            f"feasible range is [{good_loss}, {max_target:.6f}]"
        )
    pi_b = (target_p - good_loss) / (bad_loss - good_loss)
    p_bad_to_good = 1.0 - b
    p_good_to_bad = (1.0 - b) * pi_b / (1.0 - pi_b) if pi_b < 1.0 else 1.0
    return p_good_to_bad, p_bad_to_good


def ge_step(
    state: int,
    transitions: tuple[float, float],
    rng: SplitMix64,
    good_loss: float = 0.02,
    bad_loss: float = 0.95,
) -> tuple[int, bool]:
    """Advance the two-state Markov chain (one draw), then draw the drop."""
    p_good_to_bad, p_bad_to_good = transitions
    u = rng.next_float()
    if state == GOOD:
        state = BAD if u < p_good_to_bad else GOOD
    else:
        state = GOOD if u < p_bad_to_good else BAD
    loss = bad_loss if state == BAD else good_loss
    return state, rng.next_float() < loss


def truncate_bandwidth(payload: np.ndarray, sigma_pct: float) -> np.ndarray:
    """Zero the payload suffix beyond the surviving channel capacity."""
    keep = _bandwidth_keep(payload.shape[0], sigma_pct)
    if keep >= payload.shape[0]:
        return payload
    out = payload.copy()
    out[keep:] = 0.0
    return out


def _bandwidth_keep(dim: int, sigma_pct: float) -> int:
    # round-half-up on the preserved prefix length; dim - dim*s/100 avoids the
    # cancellation that dim*(1 - s/100) hits on exact-half severities
    return int(math.floor(dim - dim * sigma_pct / 100.0 + 0.5))


def apply_conflict(payload: np.ndarray, sigma_pct: float, rng: SplitMix64) -> np.ndarray:
    """Corrupt a transmitted copy with structured noise.

    Each nonzero entry is displaced to a uniformly random cell with
    probability sigma/100 (old position zeroed, collisions resolved by
    element-wise maximum). Empty cells additionally hallucinate unit evidence
    with probability (sigma/100)**2, so conflicting evidence floods the
    receiver as severity grows. The caller's array is never modified.
    """
    if sigma_pct <= 0:
        return payload
    dim = payload.shape[0]
    p_move = sigma_pct / 100.0
    p_ghost = p_move * p_move
    u = rng.block(dim)
    active = payload > 0
    moved = np.flatnonzero(active & (u < p_move))
    ghosts = np.flatnonzero(~active & (u < p_ghost))
    out = payload.copy()
    if moved.size:
        values = out[moved].copy()
        out[moved] = 0.0
        targets = (rng.block(moved.size) * dim).astype(np.int64)
        np.maximum.at(out, targets, values)
    if ghosts.size:
        np.maximum.at(out, ghosts, 1.0)
    return out


@dataclass
class StaleCache:
    """Receiver-side belief cache for one link under the stale impairment."""

    payload: np.ndarray
    last_refresh: int = -1

    @classmethod
    def empty(cls, dim: int = PAYLOAD_DIM) -> "StaleCache":
        return cls(payload=np.zeros(dim))


def stale_deliver(
    cache: StaleCache,
    fresh_payload: Optional[np.ndarray],
    sigma_steps: int,
    step: int,
    rng: SplitMix64,
) -> Optional[np.ndarray]:
    """What the receiver sees on a link whose memory refreshes every sigma steps.

    The cache accepts a fresh payload only on steps where step % sigma == 0.
    On every other step the cached belief takes one drift pass (remembered
    detections relocate, empty cells hallucinate ghosts) and either the
    drifted belief is returned or, with STALE_BLACKOUT_PROB, the link yields
    nothing for the step. A cache that has never been refreshed yields
    nothing: only remembered state can drift.
    """
    if sigma_steps <= 0:
        return fresh_payload
    if step % sigma_steps == 0 and fresh_payload is not None:
        cache.payload = fresh_payload.copy()
        cache.last_refresh = step
        return cache.payload.copy()
    if cache.last_refresh < 0:
        return None
    payload = cache.payload
    dim = payload.shape[0]
    u = rng.block(dim)
    active = payload > 0
    moved = np.flatnonzero(active & (u < STALE_DRIFT_PROB))
    ghosts = np.flatnonzero(~active & (u < STALE_GHOST_PROB))
    if moved.size:
        values = payload[moved].copy()
        payload[moved] = 0.0
        targets = (rng.block(moved.size) * dim).astype(np.int64)
        np.maximum.at(payload, targets, values)
    if ghosts.size:
        np.maximum.at(payload, ghosts, STALE_GHOST_VALUE)
    if rng.next_float() < STALE_BLACKOUT_PROB:
        return None
    return payload.copy()


def draw_async_offset(sigma_steps: int, rng: SplitMix64) -> int:
    """Per-message clock offset, uniform on {0, ..., sigma}; one draw."""
    return int(rng.next_float() * (sigma_steps + 1))


# --- the channel ------------------------------------------------------------

class CommChannel:
    """Per-episode impairment channel over (sender, receiver) links.

    Messages are submitted with send() and collected with receive(); the
    channel owns delay queues, Markov loss state, stale caches, and the
    per-link history of transmitted payloads that the async stage samples
    from. All randomness comes from the single SplitMix64 stream handed in,
    drawn in submission order, so a (pipeline, params, seed) triple fully
    determines every delivery.
    """

    def __init__(
        self,
        pipeline: list[ImpairmentSpec],
        params: ChannelParams,
        rng: SplitMix64,
        dim: int = PAYLOAD_DIM,
    ):
        seen = set()
        for spec in pipeline:
            if spec.dimension in seen:
                raise ConfigurationError(
                    f"duplicate impairment dimension in pipeline: {spec.dimension}"
                )
            seen.add(spec.dimension)
        if len(pipeline) > 2:
            raise ConfigurationError("a pipeline holds at most two impairment specs")

        self.params = params
        self.dim = dim
        self._rng = rng

        sev = {spec.dimension: spec.severity for spec in pipeline}
        self._lat_steps = latency_steps(sev.get("latency", 0.0), params.step_ms)
        self._conflict = sev.get("conflict", 0.0)
        self._bw_keep = _bandwidth_keep(dim, sev["bandwidth"]) if "bandwidth" in sev else dim
        self._async = int(sev["async"]) if "async" in sev else None
        self._stale = int(sev["stale"]) if "stale" in sev else 0

        self._loss_mode = None  # None | ("bern", p) | ("ge", transitions)
        if "packet_loss" in sev:
            p = sev["packet_loss"] / 100.0
            if (
                params.loss_model == "gilbert_elliott"
                and params.burstiness > 0.0
                and p >= params.good_loss
            ):
                self._loss_mode = (
                    "ge",
                    ge_calibrate(p, params.burstiness, params.good_loss, params.bad_loss),
                )
            else:
                # b == 0, an explicit Bernoulli model, or a target below the
                # Good-state floor (notably the clean level) all degrade to
                # independent drops.
                self._loss_mode = ("bern", p)

        self._queues: dict[tuple[int, int], dict[int, list[np.ndarray]]] = {}
        self._history: dict[tuple[int, int], list[np.ndarray]] = {}
        self._ge_state: dict[tuple[int, int], int] = {}
        self._caches: dict[tuple[int, int], StaleCache] = {}

    # -- sending -------------------------------------------------------------

    def transmit(self, envelope: MessageEnvelope) -> TransmitOutcome:
        """Run one envelope through the send-side stages.

        Returns DROPPED or the (due_step, effective_payload) of the delivery.
        The stale stage is receiver-side and applies in receive().
        """
        link = (envelope.sender, envelope.receiver)
        step = envelope.send_step
        payload = envelope.payload

        if self._conflict > 0:
            payload = apply_conflict(payload, self._conflict, self._rng)
        if self._bw_keep < self.dim:
            keep = self._bw_keep
            if payload is envelope.payload:
                payload = payload.copy()
            payload[keep:] = 0.0

        if self._async is not None:
            # Record the sender's transmitted state (post content stages, pre
            # transport) so offset copies replay what was actually emitted.
            self._history.setdefault(link, []).append(payload)

        if self._loss_mode is not None:
            kind, arg = self._loss_mode
            if kind == "bern":
                if bernoulli_drop(arg, self._rng):
                    return DROPPED
            else:
                state, dropped = ge_step(
                    self._ge_state.get(link, GOOD),
                    arg,
                    self._rng,
                    self.params.good_loss,
                    self.params.bad_loss,
                )
                self._ge_state[link] = state
                if dropped:
                    return DROPPED

        due = step + self._lat_steps

        if self._async is not None:
            offset = draw_async_offset(self._async, self._rng)
            if offset > 0:
                src = step - offset
                history = self._history[link]
                payload = history[src if src >= 0 else 0]

        return TransmitOutcome(True, due, payload)

    def send(self, payload: np.ndarray, sender: int, receiver: int, step: int) -> TransmitOutcome:
        """Submit a message; delivered payloads are queued for their due step."""
        outcome = self.transmit(MessageEnvelope(payload, sender, receiver, step))
        if outcome.delivered:
            link_queue = self._queues.setdefault((sender, receiver), {})
            link_queue.setdefault(outcome.due_step, []).append(outcome.payload)
        return outcome

    # -- receiving -----------------------------------------------------------

    def receive(self, sender: int, receiver: int, step: int) -> list[np.ndarray]:
        """Payloads the receiver sees on this link at this step.

        Under the stale impairment the link always yields exactly one payload
        (the refreshed or drifted cache); otherwise it yields whatever
        arrived, in transmission order.
        """
        link = (sender, receiver)
        arrivals = []
        link_queue = self._queues.get(link)
        if link_queue:
            arrivals = link_queue.pop(step, [])
        if self._stale > 0:
            cache = self._caches.get(link)
            if cache is None:
                cache = self._caches[link] = StaleCache.empty(self.dim)
            fresh = arrivals[0] if arrivals else None
            seen = stale_deliver(cache, fresh, self._stale, step, self._rng)
            return [seen] if seen is not None else []
        return arrivals

    def pending(self) -> int:
        """Messages enqueued but not yet received (test hook)."""
        return sum(
            len(batch) for queue in self._queues.values() for batch in queue.values()
        )
