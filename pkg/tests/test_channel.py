"""Impairment channel: stage primitives, pipelines, statistical behavior."""


import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from commstress.channel import (
    BAD,
    GOOD,
    ChannelParams,
    CommChannel,
    ConfigurationError,
    DIMENSIONS,
    ImpairmentSpec,
    MessageEnvelope,
    PAYLOAD_DIM,
    SIGMA_MAX,
    StaleCache,
    apply_conflict,
    bernoulli_drop,
    draw_async_offset,
    ge_calibrate,
    ge_step,
    latency_steps,
    message_age,
    severity_grid,
    stale_deliver,
    truncate_bandwidth,
)
from commstress.rng import SplitMix64

PARAMS = ChannelParams()


def one_hot(index, value=1.0):
    v = np.zeros(PAYLOAD_DIM)
    v[index] = value
    return v


# --- severity grids -----------------------------------------------------------

def test_severity_grid_packet_loss():
    assert severity_grid("packet_loss") == [0, 8, 16, 24, 32, 40, 48, 56, 64, 72, 80]


def test_severity_grid_latency():
    assert severity_grid("latency") == [0, 50, 100, 150, 200, 250, 300, 350, 400, 450, 500]


@pytest.mark.parametrize("dimension", DIMENSIONS)
def test_severity_grid_starts_clean(dimension):
    grid = severity_grid(dimension)
    assert len(grid) == 11
    assert grid[0] == 0
    assert grid[-1] == SIGMA_MAX[dimension]


def test_severity_grid_unknown_dimension():
    with pytest.raises(ConfigurationError):
        severity_grid("jitter")


def test_impairment_spec_validates_range():
    ImpairmentSpec("stale", 20.0)
    with pytest.raises(ConfigurationError):
        ImpairmentSpec("stale", 21.0)
    with pytest.raises(ConfigurationError):
        ImpairmentSpec("latency", -1.0)


# --- latency ---------------------------------------------------------------------

def test_latency_steps_examples():
    assert latency_steps(500, 40) == 12
    assert latency_steps(0, 40) == 0
    assert latency_steps(50, 40) == 1


def test_latency_steps_rejects_bad_step_duration():
    with pytest.raises(ConfigurationError):
        latency_steps(100, 0)
    with pytest.raises(ConfigurationError):
        latency_steps(100, -5)


# --- packet loss -------------------------------------------------------------------

def test_bernoulli_extremes():
    rng = SplitMix64(1)
    assert not any(bernoulli_drop(0.0, rng) for _ in range(1000))
    assert all(bernoulli_drop(1.0, rng) for _ in range(1000))


def test_bernoulli_empirical_rate():
    rng = SplitMix64(2024)
    n = 100_000
    dropped = sum(bernoulli_drop(0.8, rng) for _ in range(n))
    assert abs(dropped / n - 0.8) < 0.01


def test_bernoulli_consumes_one_draw():
    a, b = SplitMix64(5), SplitMix64(5)
    bernoulli_drop(0.5, a)
    b.next_float()
    assert a.state == b.state


# --- Gilbert-Elliott ----------------------------------------------------------------

def test_ge_calibrate_example():
    p_gb, p_bg = ge_calibrate(0.8, 0.9, 0.02, 0.95)
    assert p_bg == pytest.approx(0.10, abs=1e-12)
    assert p_gb == pytest.approx(0.52, abs=1e-9)
    # stationary loss reproduces the target
    pi_b = p_gb / (p_gb + p_bg)
    assert pi_b == pytest.approx(0.8387, abs=5e-5)
    assert 0.02 * (1 - pi_b) + 0.95 * pi_b == pytest.approx(0.8, abs=1e-9)


def test_ge_calibrate_degenerate_lower_bound():
    p_gb, p_bg = ge_calibrate(0.02, 0.9, 0.02, 0.95)
    assert p_gb == 0.0
    assert p_bg == pytest.approx(0.1)


def test_ge_calibrate_unreachable_target():
    with pytest.raises(ConfigurationError, match="feasible range"):
        ge_calibrate(0.01, 0.9, 0.02, 0.95)
    with pytest.raises(ConfigurationError, match="feasible range"):
        ge_calibrate(0.99, 0.0, 0.02, 0.95)


def test_ge_step_good_state_zero_loss_never_drops():
    rng = SplitMix64(3)
    transitions = (0.0, 1.0)  # never leaves Good
    state = GOOD
    for _ in range(1000):
        state, dropped = ge_step(state, transitions, rng, good_loss=0.0)
        assert state == GOOD
        assert not dropped


def test_ge_step_bad_persistence():
    rng = SplitMix64(4)
    transitions = ge_calibrate(0.8, 0.9)
    stays = trials = 0
    state = BAD
    for _ in range(200_000):
        new_state, _ = ge_step(state, transitions, rng)
        if state == BAD:
            trials += 1
            stays += new_state == BAD
        state = new_state
    assert stays / trials == pytest.approx(0.9, abs=0.01)


def test_ge_stationary_loss_and_burst_length():
    # Monte Carlo against the calibrated stationary rate and the geometric
    # burst-length mean 1/(1-b).
    for target in (0.4, 0.8):
        rng = SplitMix64(int(target * 1000))
        transitions = ge_calibrate(target, 0.9)
        state = GOOD
        drops = 0
        bursts = []
        current_burst = 0
        n = 1_000_000
        for _ in range(n):
            state, dropped = ge_step(state, transitions, rng)
            drops += dropped
            if state == BAD:
                current_burst += 1
            elif current_burst:
                bursts.append(current_burst)
                current_burst = 0
        assert abs(drops / n - target) < 0.01
        mean_burst = sum(bursts) / len(bursts)
        assert abs(mean_burst - 10.0) / 10.0 < 0.05


# --- bandwidth ------------------------------------------------------------------------

def test_truncate_identity_at_zero():
    payload = one_hot(399)
    out = truncate_bandwidth(payload, 0.0)
    assert out is payload


def test_truncate_half():
    payload = np.ones(PAYLOAD_DIM)
    out = truncate_bandwidth(payload, 50.0)
    assert np.all(out[:200] == 1.0)
    assert np.all(out[200:] == 0.0)
    assert np.all(payload == 1.0)  # caller copy untouched


def test_truncate_total_collapse():
    out = truncate_bandwidth(np.ones(PAYLOAD_DIM), 100.0)
    assert np.all(out == 0.0)


def test_truncate_rounds_half_up():
    # 400 * (1 - 99.875/100) = 0.5 -> keep exactly one entry
    out = truncate_bandwidth(np.ones(PAYLOAD_DIM), 99.875)
    assert out[0] == 1.0
    assert np.all(out[1:] == 0.0)


# --- conflict ----------------------------------------------------------------------------

def test_conflict_zero_severity_unchanged():
    payload = one_hot(123)
    assert apply_conflict(payload, 0.0, SplitMix64(1)) is payload


def test_conflict_peak_relocation_rate():
    rng = SplitMix64(77)
    relocated = 0
    trials = 10_000
    for _ in range(trials):
        out = apply_conflict(one_hot(211), 40.0, rng)
        if out[211] == 0.0:
            relocated += 1
    # peak moves with probability 0.4 (minus the 1/400 chance of landing home)
    assert relocated / trials == pytest.approx(0.4 * (1 - 1 / PAYLOAD_DIM), abs=0.02)


def test_conflict_displacement_expectation():
    # ten active cells at severity 40 -> four displaced on average
    rng = SplitMix64(88)
    payload = np.zeros(PAYLOAD_DIM)
    active = list(range(0, 100, 10))
    payload[active] = 1.0
    displaced = 0
    trials = 10_000
    for _ in range(trials):
        out = apply_conflict(payload, 40.0, rng)
        displaced += sum(out[i] == 0.0 for i in active)
    assert displaced / trials == pytest.approx(4.0, abs=0.15)


def test_conflict_never_mutates_input():
    payload = one_hot(50)
    before = payload.copy()
    apply_conflict(payload, 40.0, SplitMix64(9))
    assert np.array_equal(payload, before)


def test_conflict_injects_ghost_evidence():
    # hallucinated false positives appear at (sigma/100)^2 per empty cell
    rng = SplitMix64(10)
    extra = []
    for _ in range(2000):
        out = apply_conflict(one_hot(0), 40.0, rng)
        extra.append(np.count_nonzero(out) - 1)
    assert np.mean(extra) == pytest.approx(0.16 * (PAYLOAD_DIM - 1), rel=0.05)


# --- stale ---------------------------------------------------------------------------------

def test_stale_zero_severity_pass_through():
    cache = StaleCache.empty()
    fresh = one_hot(3)
    assert stale_deliver(cache, fresh, 0, 5, SplitMix64(1)) is fresh


def test_stale_refresh_schedule():
    # sigma=20 over a 50-step episode: genuine refreshes only at 0, 20, 40
    cache = StaleCache.empty()
    rng = SplitMix64(2)
    refreshes = []
    for step in range(50):
        stale_deliver(cache, one_hot(step % PAYLOAD_DIM), 20, step, rng)
        if cache.last_refresh == step:
            refreshes.append(step)
    assert refreshes == [0, 20, 40]


def test_stale_never_refreshed_yields_nothing():
    cache = StaleCache.empty()
    rng = SplitMix64(3)
    state_before = rng.state
    for step in range(1, 6):
        assert stale_deliver(cache, None, 4, step, rng) is None
    assert rng.state == state_before  # nothing remembered, nothing drifts


def test_stale_drift_corrupts_cached_belief():
    cache = StaleCache.empty()
    rng = SplitMix64(4)
    fresh = one_hot(157)
    stale_deliver(cache, fresh, 20, 0, rng)
    moved = ghosted = 0
    for _ in range(500):
        cache.payload = fresh.copy()
        cache.last_refresh = 0
        out = stale_deliver(cache, None, 20, 1, rng)
        if out is None:
            out = cache.payload
        moved += out[157] == 0.0
        ghosted += np.count_nonzero(out) > 1
    assert moved / 500 > 0.75   # relocation probability 0.9 (minus landing home)
    assert ghosted / 500 > 0.99  # ~20 ghost cells per pass


def test_stale_blackout_rate():
    cache = StaleCache.empty()
    rng = SplitMix64(5)
    stale_deliver(cache, one_hot(0), 20, 0, rng)
    dark = sum(stale_deliver(cache, None, 20, step, rng) is None for step in range(1, 2001))
    assert dark / 2000 == pytest.approx(0.5, abs=0.05)


def test_stale_refresh_step_requires_fresh_payload():
    cache = StaleCache.empty()
    rng = SplitMix64(6)
    stale_deliver(cache, one_hot(9), 4, 0, rng)
    stale_deliver(cache, None, 4, 4, rng)  # refresh step, but nothing arrived
    assert cache.last_refresh == 0


# --- async ------------------------------------------------------------------------------------

def test_async_offsets_zero_severity():
    rng = SplitMix64(1)
    assert all(draw_async_offset(0, rng) == 0 for _ in range(100))


def test_async_offsets_uniform_mean():
    rng = SplitMix64(2)
    n = 100_000
    draws = [draw_async_offset(10, rng) for _ in range(n)]
    assert min(draws) == 0 and max(draws) == 10
    assert sum(draws) / n == pytest.approx(5.0, abs=0.1)


def test_async_min_of_two_offsets_matches_enumeration():
    # brute-force oracle over the 11 x 11 outcome grid
    oracle = sum(min(a, b) for a in range(11) for b in range(11)) / 121
    assert oracle == pytest.approx(385 / 121)
    rng = SplitMix64(3)
    n = 100_000
    total = sum(
        min(draw_async_offset(10, rng), draw_async_offset(10, rng)) for _ in range(n)
    )
    assert total / n == pytest.approx(oracle, abs=0.05)


# --- envelope / timestamps ----------------------------------------------------------------------

def test_envelope_timestamp_wraps_to_16_bits():
    env = MessageEnvelope(one_hot(0), 0, 1, send_step=65536 + 7)
    assert env.timestamp == 7


def test_message_age_wraparound():
    assert message_age(3, 65534) == 5
    assert message_age(100, 40) == 60


# --- transmit pipelines -------------------------------------------------------------------------

def pipe(*specs):
    return [ImpairmentSpec(d, s) for d, s in specs]


def test_empty_pipeline_is_identity():
    channel = CommChannel([], PARAMS, SplitMix64(1))
    payload = one_hot(12)
    outcome = channel.transmit(MessageEnvelope(payload, 0, 1, 5))
    assert outcome.delivered
    assert outcome.due_step == 5
    assert outcome.payload is payload


def test_zero_severity_pipeline_is_identity_on_every_envelope():
    specs = [ImpairmentSpec(d, 0.0) for d in DIMENSIONS[:2]]
    channel = CommChannel(specs, PARAMS, SplitMix64(2))
    for step in range(20):
        payload = one_hot(step)
        outcome = channel.transmit(MessageEnvelope(payload, 0, 1, step))
        assert outcome.delivered
        assert outcome.due_step == step
        assert np.array_equal(outcome.payload, payload)


def test_duplicate_dimension_rejected():
    with pytest.raises(ConfigurationError, match="duplicate"):
        CommChannel(pipe(("stale", 4), ("stale", 8)), PARAMS, SplitMix64(1))


def test_pipeline_holds_at_most_two_specs():
    with pytest.raises(ConfigurationError):
        CommChannel(pipe(("stale", 4), ("latency", 50), ("async", 2)), PARAMS, SplitMix64(1))


def test_packet_loss_delivery_fraction():
    channel = CommChannel(pipe(("packet_loss", 80.0)), PARAMS, SplitMix64(11))
    n = 100_000
    delivered = sum(
        channel.transmit(MessageEnvelope(one_hot(0), 0, 1, 0)).delivered for _ in range(n)
    )
    assert delivered / n == pytest.approx(0.20, abs=0.01)


def test_redundancy_law_dual_copies():
    # probability both independent copies drop is p^2
    channel = CommChannel(pipe(("packet_loss", 80.0)), PARAMS, SplitMix64(12))
    n = 100_000
    both_lost = 0
    for _ in range(n):
        a = channel.transmit(MessageEnvelope(one_hot(0), 0, 1, 0)).delivered
        b = channel.transmit(MessageEnvelope(one_hot(0), 0, 1, 0)).delivered
        both_lost += not a and not b
    assert both_lost / n == pytest.approx(0.64, abs=0.01)


def test_bandwidth_collapse_delivers_zero_payload():
    channel = CommChannel(pipe(("bandwidth", 100.0), ("packet_loss", 0.0)), PARAMS, SplitMix64(13))
    outcome = channel.transmit(MessageEnvelope(one_hot(321), 0, 1, 0))
    assert outcome.delivered
    assert np.all(outcome.payload == 0.0)


def test_latency_queues_for_due_step():
    channel = CommChannel(pipe(("latency", 500.0)), PARAMS, SplitMix64(14))
    channel.send(one_hot(5), 0, 1, step=0)
    for step in range(12):
        assert channel.receive(0, 1, step) == []
    arrivals = channel.receive(0, 1, 12)
    assert len(arrivals) == 1
    assert arrivals[0][5] == 1.0


def test_async_replays_earlier_sender_state():
    channel = CommChannel(pipe(("async", 10.0)), PARAMS, SplitMix64(15))
    # distinct payload per step; offsets must reproduce an earlier one exactly
    for step in range(30):
        channel.send(one_hot(step), 0, 1, step)
    seen_old = False
    for step in range(30):
        for payload in channel.receive(0, 1, step):
            origin = int(np.argmax(payload))
            assert 0 <= step - origin <= 10
            seen_old |= origin < step
    assert seen_old


def test_transmit_never_mutates_sender_payload():
    for spec in (("conflict", 40.0), ("bandwidth", 60.0), ("stale", 8.0)):
        channel = CommChannel(pipe(spec), PARAMS, SplitMix64(16))
        payload = one_hot(250)
        before = payload.copy()
        channel.send(payload, 0, 1, 0)
        channel.receive(0, 1, 0)
        assert np.array_equal(payload, before), spec


def test_identical_seed_reproduces_delivery_sequence():
    def run():
        channel = CommChannel(pipe(("packet_loss", 48.0), ("latency", 200.0)), PARAMS, SplitMix64(99))
        log = []
        for step in range(40):
            channel.send(one_hot(step % 7), 0, 1, step)
            log.append(tuple(float(p[step % 7]) for p in channel.receive(0, 1, step)))
        return log

    assert run() == run()


def test_ge_channel_is_per_link():
    channel = CommChannel(
        pipe(("packet_loss", 80.0)),
        ChannelParams(loss_model="gilbert_elliott", burstiness=0.9),
        SplitMix64(17),
    )
    # both links see the stationary rate independently
    outcomes = {link: [] for link in ((0, 1), (2, 3))}
    for _ in range(20_000):
        for link in outcomes:
            outcomes[link].append(
                channel.transmit(MessageEnvelope(one_hot(0), *link, 0)).delivered
            )
    for link, delivered in outcomes.items():
        assert sum(delivered) / len(delivered) == pytest.approx(0.2, abs=0.02), link


def test_ge_low_target_falls_back_to_bernoulli():
    # below the Good-state floor (notably the clean level) drops are Bernoulli
    channel = CommChannel(
        pipe(("packet_loss", 0.0)),
        ChannelParams(loss_model="gilbert_elliott", burstiness=0.9),
        SplitMix64(18),
    )
    assert all(
        channel.transmit(MessageEnvelope(one_hot(0), 0, 1, 0)).delivered
        for _ in range(2000)
    )


@given(st.integers(min_value=0, max_value=2**63), st.integers(min_value=0, max_value=399))
@settings(max_examples=30, deadline=None)
def test_conflict_preserves_value_mass_bound(seed, index):
    # displacement moves values; it never increases the maximum
    out = apply_conflict(one_hot(index), 40.0, SplitMix64(seed))
    assert out.max() <= 1.0
    assert np.count_nonzero(out) >= 0
