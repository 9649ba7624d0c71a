import pytest

from leopd.engine import Event, EventKind, SchedulingError, Simulator, rng_stream, to_ns


def _recorder(sim):
    log = []
    for kind in EventKind:
        sim.on(kind, lambda ev: log.append((sim.now, ev.target)))
    return log


def test_same_time_events_keep_insertion_order():
    sim = Simulator()
    log = _recorder(sim)
    sim.at(to_ns(5.0), EventKind.SLOT, "A")
    sim.at(to_ns(5.0), EventKind.SLOT, "B")
    sim.at(to_ns(1.0), EventKind.SLOT, "early")
    sim.run_until(to_ns(10))
    assert [t for _, t in log] == ["early", "A", "B"]


def test_event_at_clock_runs_before_later_events():
    sim = Simulator()
    log = _recorder(sim)
    sim.run_until(to_ns(1.0))
    sim.at(to_ns(2.0), EventKind.SLOT, "later")
    sim.at(sim.now, EventKind.SLOT, "now")
    sim.run_until(to_ns(3.0))
    assert [t for _, t in log] == ["now", "later"]


def test_cancelled_event_never_fires():
    sim = Simulator()
    log = _recorder(sim)
    h = sim.at(10, EventKind.SLOT, "x")
    sim.cancel(h)
    sim.run_until(100)
    assert log == []
    assert sim.pending() == 0


def test_past_event_rejected():
    sim = Simulator()
    sim.on(EventKind.SLOT, lambda ev: None)
    sim.run_until(100)
    with pytest.raises(SchedulingError):
        sim.schedule(Event(50, EventKind.SLOT, "late"))


def test_run_until_stops_at_horizon():
    sim = Simulator()
    log = _recorder(sim)
    sim.at(100, EventKind.SLOT, "in")
    sim.at(101, EventKind.SLOT, "out")
    sim.run_until(100)
    assert [t for _, t in log] == ["in"]
    assert sim.now == 100


def test_empty_queue_advances_clock():
    sim = Simulator()
    sim.run_until(to_ns(10))
    assert sim.now == to_ns(10)


def test_trace_digest_replays_identically():
    def build():
        sim = Simulator()
        sim.on(EventKind.SLOT, lambda ev: sim.after(3, EventKind.HARQ_FEEDBACK, "f") if ev.fire_time < 50 else None)
        sim.on(EventKind.HARQ_FEEDBACK, lambda ev: None)
        for t in range(0, 100, 7):
            sim.at(t, EventKind.SLOT, f"s{t}")
        sim.run_until(200)
        return sim.trace_digest()

    assert build() == build()


def test_trace_is_written_when_requested(tmp_path):
    path = tmp_path / "trace.log"
    with open(path, "w") as fh:
        sim = Simulator(trace=fh)
        sim.on(EventKind.SLOT, lambda ev: None)
        sim.at(5, EventKind.SLOT, "cell0")
        sim.run_until(10)
    assert path.read_text() == "5 slot cell0\n"


def test_rng_streams():
    a = rng_stream(7, "shadow-fading").random(5)
    b = rng_stream(7, "shadow-fading").random(5)
    c = rng_stream(7, "los-draw").random(5)
    d = rng_stream(8, "shadow-fading").random(5)
    assert (a == b).all()
    assert not (a == c).any()
    assert not (a == d).any()
    with pytest.raises(ValueError):
        rng_stream(7, "")
