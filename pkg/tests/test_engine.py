import pytest
from hypothesis import given
from hypothesis import strategies as st

from thtp.engine import EventKind, Scheduler, SchedulingError


def test_single_event_is_head():
    s = Scheduler()
    ev = s.schedule(3.25, EventKind.DETECTION)
    assert s.peek() is ev


def test_equal_times_run_in_insertion_order():
    s = Scheduler()
    seen = []
    s.on(EventKind.DETECTION, lambda ev: seen.append(ev.seq))
    a = s.schedule(5.0, EventKind.DETECTION)
    b = s.schedule(5.0, EventKind.DETECTION)
    assert a.seq < b.seq
    s.run_until(10)
    assert seen == [a.seq, b.seq]


def test_earlier_event_becomes_head():
    s = Scheduler()
    s.schedule(4.0, EventKind.SPREAD_FORWARD)
    ev = s.schedule(2.0, EventKind.SPREAD_FORWARD)
    assert s.peek() is ev


@given(st.lists(st.floats(0, 1e6, allow_nan=False), max_size=60))
def test_execution_matches_sorted_oracle(times):
    s = Scheduler(record=True)
    for t in times:
        s.schedule(t, EventKind.METRIC_SAMPLE)
    s.run_until(2e6)
    oracle = sorted((t, i) for i, t in enumerate(times))
    assert [(t, seq) for t, seq, _ in s.log] == oracle


def test_rejects_past_events():
    s = Scheduler()
    s.run_until(5.0)
    with pytest.raises(SchedulingError):
        s.schedule(4.9, EventKind.DETECTION)
    with pytest.raises(SchedulingError):
        s.run_until(1.0)


def test_run_until_on_empty_queue_advances_clock():
    s = Scheduler()
    assert s.run_until(10) == 0
    assert s.now == 10


def test_run_until_cuts_at_threshold():
    s = Scheduler()
    for t in (1, 2, 3):
        s.schedule(t, EventKind.DETECTION)
    assert s.run_until(2.5) == 2
    assert len(s) == 1
    assert s.now == 2.5


def test_self_scheduling_chain():
    s = Scheduler()
    times = []

    def tick(ev):
        times.append(s.now)
        s.schedule(s.now + 1, EventKind.AGENT_STEP)

    s.on(EventKind.AGENT_STEP, tick)
    s.schedule(0.0, EventKind.AGENT_STEP)
    assert s.run_until(5) == 6
    assert times == [0, 1, 2, 3, 4, 5]


def test_cancel():
    s = Scheduler()
    fired = []
    s.on(EventKind.SPREAD_FORWARD, fired.append)
    ev = s.schedule(1.0, EventKind.SPREAD_FORWARD)
    assert s.cancel(ev) is True
    assert s.cancel(ev) is False
    s.run_until(2.0)
    assert fired == []
    assert len(s) == 0


def test_cancel_after_execution():
    s = Scheduler()
    ev = s.schedule(1.0, EventKind.SPREAD_FORWARD)
    s.run_until(2.0)
    assert s.cancel(ev) is False
    assert s.cancel(None) is False


def test_handlers_only_schedule_forward_in_time():
    s = Scheduler(record=True)

    def spawn(ev):
        if s.now < 3 and ev.payload is None:
            s.schedule(s.now + 0.5, EventKind.DETECTION)
            s.schedule(s.now, EventKind.DETECTION, "echo")

    s.on(EventKind.DETECTION, spawn)
    s.schedule(0.0, EventKind.DETECTION)
    s.run_until(10)
    keys = [(t, q) for t, q, _ in s.log]
    assert keys == sorted(keys)
    assert len(set(keys)) == len(keys)
