import math

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from leopd.channel import LinkBudgetParams, LinkState, received_power
from leopd.phymac import (
    BlerCurve,
    HarqOutcome,
    HarqProcess,
    RoundRobinScheduler,
    TransportBlock,
    bler,
    co_channel,
    hex_rings,
    on_feedback,
    power_sum_dbm,
    rsrp,
    schedule_round_robin,
    sinr,
    transmit,
)


def test_sinr_without_interference():
    assert sinr(-90.0, [], -100.0) == pytest.approx(10.0)
    assert sinr(-90.0, -math.inf, -100.0) == pytest.approx(10.0)


def test_two_equal_interferers_add_3db():
    one = power_sum_dbm([-100.0])
    two = power_sum_dbm([-100.0, -100.0])
    assert two - one == pytest.approx(3.0103, abs=1e-4)
    assert sinr(-80, [-100.0, -100.0], -200.0) == pytest.approx(20 - 3.0103, abs=1e-3)


def test_frf3_interferers_are_co_channel_only():
    beams = hex_rings(2, 3)
    assert len(beams) == 18
    assert [b.ring for b in co_channel(beams)] == [2] * 6
    # no neighbour pair shares a sub-band
    coords = {(b.q, b.r): b.color for b in beams}
    coords[(0, 0)] = 0
    for (q, r), c in coords.items():
        for dq, dr in [(1, 0), (1, -1), (0, -1), (-1, 0), (-1, 1), (0, 1)]:
            if (q + dq, r + dr) in coords:
                assert coords[(q + dq, r + dr)] != c
    assert len(co_channel(hex_rings(2, 1))) == 18
    with pytest.raises(ValueError):
        hex_rings(2, 2)


def test_bler_shape():
    curve = BlerCurve(midpoint_sinr=2.0, slope=1.5)
    assert bler(2.0, curve) == pytest.approx(0.5)
    assert bler(1e6, curve) == 0.0
    assert bler(-1e6, curve) == 1.0


@given(st.floats(-50, 50), st.floats(0.001, 10))
def test_bler_monotone(s, ds):
    curve = BlerCurve(0.0, 0.8)
    assert bler(s + ds, curve) <= bler(s, curve)
    assert 0.0 <= bler(s, curve) <= 1.0


def test_round_robin_alternates():
    rr = RoundRobinScheduler()
    rr.register("a")
    rr.register("b")
    grants = [rr.allocate({"a": 5, "b": 5}, 1)[0] for _ in range(4)]
    assert grants == ["a", "b", "a", "b"]


def test_round_robin_single_and_skip():
    rr = RoundRobinScheduler(resources_per_tb=2)
    for k in "abc":
        rr.register(k)
    assert rr.allocate({"a": 10}, 8) == ["a"] * 4
    rr2 = RoundRobinScheduler()
    for k in "abc":
        rr2.register(k)
    assert rr2.allocate({"a": 1, "b": 0, "c": 3}, 10) == ["a", "c", "c", "c"]
    assert rr2.allocate({}, 10) == []


def test_round_robin_functional_form():
    grants, nxt = schedule_round_robin([2, 0, 1], 2, start=0)
    assert grants == [0, 2]
    assert nxt == 0


def _proc(attempt, decoded, primary=True):
    tb = TransportBlock(1, [], 32, (0, 0, 0), attempt=attempt)
    return HarqProcess(tb, 0, decoded, primary)


def test_transmit_extremes():
    tb = TransportBlock(1, [], 32, (0, 0, 0))
    rng = np.random.default_rng(0)
    curve = BlerCurve(0.0, 1.0)
    assert all(transmit(tb, 1e6, curve, rng) for _ in range(100))
    assert not any(transmit(tb, -1e6, curve, rng) for _ in range(100))


def test_feedback_actions():
    ack = _proc(1, True)
    assert on_feedback(ack).retransmit is False
    assert ack.outcome is HarqOutcome.ACKED
    first = on_feedback(_proc(1, False))
    assert first.retransmit and not first.failed and first.notify_duplication
    last = on_feedback(_proc(2, False))
    assert last.failed and not last.retransmit and last.notify_duplication
    sn = on_feedback(_proc(1, False, primary=False))
    assert sn.retransmit and not sn.notify_duplication


def test_harq_process_resolves_once():
    p = _proc(1, True)
    on_feedback(p)
    with pytest.raises(RuntimeError):
        on_feedback(p)


def test_at_most_two_attempts():
    with pytest.raises(ValueError):
        TransportBlock(1, [], 32, (0, 0, 0), attempt=3)


def test_rsrp_difference_equals_power_difference():
    params = LinkBudgetParams(eirp=74.0)
    a = LinkState(True, 0.0, 0.0, 60, 700e3, 2e9)
    b = LinkState(False, 3.0, 17.8, 60, 720e3, 2e9)
    assert rsrp(a, params) > rsrp(b, params)
    assert rsrp(a, params) == rsrp(LinkState(True, 0.0, 0.0, 60, 700e3, 2e9), params)
    from leopd.channel import basic_path_loss

    diff_c = received_power(params, basic_path_loss(a)) - received_power(params, basic_path_loss(b))
    assert rsrp(a, params) - rsrp(b, params) == pytest.approx(diff_c)
