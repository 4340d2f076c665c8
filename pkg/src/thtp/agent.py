"""Tracking agent: biased random walk, greedy climbing, cul-de-sac marking."""

from __future__ import annotations

from collections import deque
from dataclasses import dataclass, field
from typing import Callable

import numpy as np

from .geometry import Network

RANDOM_WALK = "random-walk"
CLIMBING = "climbing"
BACKTRACKING = "backtracking"

# How the run-level best estimation compares observations. "observed" keeps
# the raw intensity seen at visit time; "current" compares what those traces
# are worth now (observation + decay since), i.e. their decay-free potential.
BEST_OBSERVED = "observed"
BEST_CURRENT = "current"
BEST_POLICIES = (BEST_OBSERVED, BEST_CURRENT)

TRAIL_LIMIT = 1024


@dataclass
class AgentMark:
    kind: str  # "visited" or "bad"
    target_id: int | None
    start_time: float
    start_intensity: float  # lifetime in seconds at unit decay

    def alive(self, t: float) -> bool:
        return self.start_intensity - (t - self.start_time) > 0.0


class MarkStore:
    """Inhibitory marks dropped by walkers. Visited marks ignore targets;
    bad marks are kept per target."""

    def __init__(self, visited_lifetime: float = 60.0, bad_lifetime: float = 300.0):
        self.visited_lifetime = visited_lifetime
        self.bad_lifetime = bad_lifetime
        self.visited: dict[int, AgentMark] = {}
        self.bad: dict[tuple[int, int], AgentMark] = {}

    def mark_visited(self, node: int, t: float) -> None:
        self.visited[node] = AgentMark("visited", None, t, self.visited_lifetime)

    def mark_bad(self, node: int, target_id: int, t: float) -> None:
        self.bad[(node, target_id)] = AgentMark("bad", target_id, t, self.bad_lifetime)

    def is_visited(self, node: int, t: float) -> bool:
        m = self.visited.get(node)
        if m is None:
            return False
        if not m.alive(t):
            del self.visited[node]
            return False
        return True

    def is_bad(self, node: int, target_id: int, t: float) -> bool:
        m = self.bad.get((node, target_id))
        if m is None:
            return False
        if not m.alive(t):
            del self.bad[(node, target_id)]
            return False
        return True


@dataclass
class Walker:
    """Anything that hops over the network following a trace gradient."""

    current: int
    target_id: int
    mode: str = RANDOM_WALK
    trail: deque = field(default_factory=lambda: deque(maxlen=TRAIL_LIMIT))

    @property
    def previous(self) -> int | None:
        return self.trail[-1] if self.trail else None


@dataclass
class Best:
    node: int
    intensity: float
    time: float

    def key(self, policy: str) -> float:
        if policy == BEST_CURRENT:
            return self.intensity + self.time
        return self.intensity


@dataclass
class AgentState(Walker):
    id: int = 0
    origin: int = 0
    best: Best | None = None
    trajectory: list | None = None


def gradient_hop(
    walker: Walker,
    network: Network,
    intensity: Callable[[int], float],
    marks: MarkStore,
    t: float,
    rng: np.random.Generator,
    fresh_threshold: float,
) -> int:
    """Move ``walker`` one hop (or keep it in place) and return its new node.

    Climbs to the strongest non-bad neighbour when one beats the current
    node. At a stale local maximum it marks the node bad for its target and
    steps back along its trail. With no trace in sight it random-walks,
    preferring neighbours without a visited mark.
    """
    cur = walker.current
    nbrs = network.adjacency[cur]
    if not nbrs:
        return cur
    target = walker.target_id
    allowed = [m for m in nbrs if not marks.is_bad(m, target, t)]
    here = intensity(cur)
    best_val, best_m = 0.0, None
    for m in allowed:
        v = intensity(m)
        if v > best_val:
            best_val, best_m = v, m

    if best_m is not None and best_val > here:
        walker.mode = CLIMBING
        return _advance(walker, best_m)
    if here <= 0.0:
        return _random_move(walker, allowed, marks, t, rng)
    if here >= fresh_threshold:
        # Fresh maximum: this is where the target was just seen.
        walker.mode = CLIMBING
        return cur
    marks.mark_bad(cur, target, t)
    back = walker.previous
    if back is not None and not marks.is_bad(back, target, t):
        walker.trail.pop()
        walker.mode = BACKTRACKING
        walker.current = back
        return back
    return _random_move(walker, [m for m in allowed if m != cur], marks, t, rng)


def _advance(walker: Walker, node: int) -> int:
    walker.trail.append(walker.current)
    walker.current = node
    return node


def _random_move(walker: Walker, allowed: list[int], marks: MarkStore, t: float, rng) -> int:
    walker.mode = RANDOM_WALK
    if not allowed:
        return walker.current
    fresh = [m for m in allowed if not marks.is_visited(m, t)]
    pool = fresh or allowed
    nxt = pool[int(rng.integers(len(pool)))]
    marks.mark_visited(walker.current, t)
    return _advance(walker, nxt)


def observe_and_update_best(agent: AgentState, node: int, observed: float, t: float, policy: str = BEST_OBSERVED) -> Best | None:
    """Fold one observation into the agent's best estimation.

    Only positive observations count; ties go to the more recent one.
    """
    if observed <= 0.0:
        return agent.best
    cand = Best(node, observed, t)
    if agent.best is None or cand.key(policy) >= agent.best.key(policy):
        agent.best = cand
    return agent.best


def spawn_agents(count: int, origin: int, target_id: int, t: float = 0.0, first_id: int = 0, record: bool = False) -> list[AgentState]:
    if count < 1:
        raise ValueError("need at least one agent")
    return [
        AgentState(
            current=origin,
            target_id=target_id,
            id=first_id + k,
            origin=origin,
            trajectory=[] if record else None,
        )
        for k in range(count)
    ]


def agent_step(
    agent: AgentState,
    network: Network,
    intensity: Callable[[int], float],
    marks: MarkStore,
    t: float,
    rng: np.random.Generator,
    fresh_threshold: float,
    policy: str = BEST_OBSERVED,
) -> int:
    node = gradient_hop(agent, network, intensity, marks, t, rng, fresh_threshold)
    observed = intensity(node)
    observe_and_update_best(agent, node, observed, t, policy)
    if agent.trajectory is not None:
        agent.trajectory.append((t, node, agent.mode, observed))
    return node
