import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from thtp.agent import (
    BACKTRACKING,
    BEST_CURRENT,
    BEST_OBSERVED,
    CLIMBING,
    RANDOM_WALK,
    AgentMark,
    AgentState,
    Best,
    MarkStore,
    Walker,
    agent_step,
    gradient_hop,
    observe_and_update_best,
    spawn_agents,
)
from thtp.geometry import Network
from thtp.simulation import TARGET_ID, coverage_simulation
from tests.conftest import line_network


def field(values):
    return lambda n: values.get(n, 0.0)


def test_climbs_to_strongest_neighbour():
    net = line_network([0, 50, 100, 150])
    w = Walker(1, 0)
    node = gradient_hop(w, net, field({0: 10, 1: 20, 2: 30}), MarkStore(), 0.0, None, 250)
    assert node == 2 and w.mode == CLIMBING and w.previous == 1


def test_climb_tie_goes_to_lowest_id():
    net = line_network([0, 50, 100])
    w = Walker(1, 0)
    assert gradient_hop(w, net, field({0: 30, 2: 30}), MarkStore(), 0.0, None, 250) == 0


def test_fresh_maximum_stays():
    net = line_network([0, 50, 100])
    w = Walker(1, 0)
    assert gradient_hop(w, net, field({0: 10, 1: 290, 2: 5}), MarkStore(), 0.0, None, 250) == 1
    assert w.mode == CLIMBING


def test_stale_maximum_marks_bad_and_backtracks():
    net = line_network([0, 50, 100])
    marks = MarkStore()
    w = Walker(1, 0)
    w.trail.append(0)
    f = field({1: 100, 0: 50})
    assert gradient_hop(w, net, f, marks, 5.0, np.random.default_rng(0), 250) == 0
    assert w.mode == BACKTRACKING
    assert marks.is_bad(1, 0, 5.0)
    assert not marks.is_bad(1, 1, 5.0)


def test_bad_neighbours_are_not_climbed():
    net = line_network([0, 50, 100])
    marks = MarkStore()
    marks.mark_bad(2, 0, 0.0)
    w = Walker(1, 0)
    assert gradient_hop(w, net, field({0: 20, 1: 10, 2: 90}), marks, 0.0, None, 250) == 0


def test_random_walk_prefers_unvisited(scripted):
    net = line_network([0, 50, 100])
    marks = MarkStore()
    marks.mark_visited(0, 0.0)
    rng = scripted(integers=[0])
    w = Walker(1, 0)
    assert gradient_hop(w, net, field({}), marks, 1.0, rng, 250) == 2
    assert rng.int_calls == [1]
    assert marks.is_visited(1, 1.0)
    assert w.mode == RANDOM_WALK


def test_isolated_node_stays():
    net = line_network([0, 500])
    w = Walker(0, 0)
    assert gradient_hop(w, net, field({}), MarkStore(), 0.0, None, 250) == 0


def test_mark_lifetimes():
    marks = MarkStore(visited_lifetime=60, bad_lifetime=300)
    marks.mark_visited(3, 0.0)
    marks.mark_bad(3, 0, 0.0)
    assert marks.is_visited(3, 59.9) and not marks.is_visited(3, 60.0)
    assert marks.is_bad(3, 0, 299.9) and not marks.is_bad(3, 0, 300.0)
    assert AgentMark("bad", 0, 10.0, 5.0).alive(14.0)


def test_best_estimation_policies():
    a = AgentState(current=0, target_id=0)
    observe_and_update_best(a, 4, 0.0, 1.0)
    assert a.best is None
    observe_and_update_best(a, 4, 200.0, 10.0)
    observe_and_update_best(a, 5, 150.0, 100.0)
    assert a.best.node == 4
    # same value later wins the tie
    observe_and_update_best(a, 6, 200.0, 120.0)
    assert a.best.node == 6
    b = AgentState(current=0, target_id=0)
    observe_and_update_best(b, 4, 200.0, 10.0, BEST_CURRENT)
    observe_and_update_best(b, 5, 150.0, 100.0, BEST_CURRENT)
    assert b.best.node == 5
    assert Best(1, 150.0, 100.0).key(BEST_OBSERVED) == 150.0


def test_spawn_and_step_records_trajectory():
    net = line_network([0, 50, 100])
    (a,) = spawn_agents(1, 1, 0, record=True)
    agent_step(a, net, field({2: 40}), MarkStore(), 3.0, None, 250)
    assert a.current == 2
    assert a.trajectory == [(3.0, 2, CLIMBING, 40)]
    assert a.best == Best(2, 40, 3.0)
    with pytest.raises(ValueError):
        spawn_agents(0, 0, 0)


def test_climb_reaches_static_peak():
    # a trace gradient along a line must be climbed in len-1 steps
    xs = list(range(0, 1000, 60))
    net = line_network(xs, 70.0)
    f = field({i: 100.0 + i for i in range(len(xs))})
    w = Walker(0, 0)
    for _ in range(len(xs) - 1):
        gradient_hop(w, net, f, MarkStore(), 0.0, None, 100.0 + len(xs) - 1)
    assert w.current == len(xs) - 1


@given(st.lists(st.tuples(st.integers(0, 20), st.floats(0, 300)), max_size=50))
def test_observed_best_never_decreases(observations):
    a = AgentState(current=0, target_id=0)
    last = 0.0
    for t, (node, v) in enumerate(observations):
        observe_and_update_best(a, node, v, float(t))
        cur = a.best.intensity if a.best else 0.0
        assert cur >= last
        last = cur


@pytest.fixture(scope="module")
def frozen_field():
    net = Network.random(400, 700.0, 100.0, np.random.default_rng(8))
    sim = coverage_simulation(net, net.nearest_node((350.0, 350.0)))
    t = sim.sched.now
    return net, sim.intensity_fn(TARGET_ID, t), t


def test_climb_strictly_increases_on_frozen_traces(frozen_field):
    net, f, t = frozen_field
    for start in range(0, len(net), 7):
        w = Walker(start, TARGET_ID)
        for _ in range(300):
            here = f(w.current)
            prev = w.current
            gradient_hop(w, net, f, MarkStore(), t, np.random.default_rng(start), 1e9)
            if w.mode != CLIMBING or w.current == prev:
                break
            assert f(w.current) > here
        else:
            pytest.fail("climb did not stop within 300 hops")


@settings(max_examples=60, deadline=None)
@given(st.integers(0, 2**32 - 1))
def test_never_steps_onto_bad_node(seed):
    rng = np.random.default_rng(seed)
    net = Network.random(60, 300.0, 100.0, rng)
    vals = {i: float(v) for i, v in enumerate(rng.choice([0, 50, 150, 299], 60))}
    marks = MarkStore()
    for node in rng.choice(60, 15, replace=False):
        marks.mark_bad(int(node), 0, 0.0)
    w = Walker(int(rng.integers(60)), 0)
    for step in range(40):
        before = w.current
        nxt = gradient_hop(w, net, field(vals), marks, float(step), rng, 299.0)
        if nxt != before:
            assert not marks.is_bad(nxt, 0, float(step))


def test_bad_marks_are_shared_between_agents():
    net = line_network([0, 50, 100])
    marks = MarkStore()
    first = Walker(1, 0)
    first.trail.append(0)
    # node 1 is a stale local maximum: the first agent marks it and leaves
    f = field({0: 40, 1: 100, 2: 40})
    gradient_hop(first, net, f, marks, 0.0, np.random.default_rng(0), 299.0)
    second = Walker(0, 0)
    for t in range(1, 50):
        gradient_hop(second, net, f, marks, float(t), np.random.default_rng(t), 299.0)
        assert second.current != 1


def test_random_walk_covers_component():
    rng = np.random.default_rng(4)
    net = Network.random(80, 400.0, 100.0, rng)
    start = max(net.components(), key=len)[0]
    comp = set(net.component_of(start))
    w = Walker(start, 0)
    marks = MarkStore()
    seen = {start}
    for t in range(20_000):
        seen.add(gradient_hop(w, net, field({}), marks, float(t), rng, 299.0))
        if seen == comp:
            break
    assert seen == comp
