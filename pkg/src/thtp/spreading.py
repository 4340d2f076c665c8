"""Degree-2 spanning spread of traces with a repulsion point and inhibition.

A node spreading trace T picks at most two children among the neighbours
that are strictly farther than itself from T's repulsion point: the farthest
one (deterministic) and one other drawn uniformly. Each child stores a
SPREAD trace worth the sender's current intensity minus a fixed penalty, and
forwards it one propagation period later.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .geometry import Network
from .traces import Hop, Trace, TraceStore

# Inhibition policies. The default suppresses a spread when some candidate
# child already holds a live trace at least as strong as what would be sent.
INHIBIT_CARRIED = "carried"
INHIBIT_STRONGER = "stronger"  # candidate strictly stronger than the sender
INHIBIT_ANY = "any"  # candidate holds any live trace
INHIBIT_NONE = "none"
# like "carried", but a candidate whose trace hangs off the same parent as
# the sender's (a sibling in the same tree) is not an overlap
INHIBIT_OVERLAP = "overlap"
INHIBITION_POLICIES = (INHIBIT_CARRIED, INHIBIT_OVERLAP, INHIBIT_STRONGER, INHIBIT_ANY, INHIBIT_NONE)

# What an inhibiting trace suppresses: the whole forward ("all", any member
# of v_rep can trigger it) or only the message to that selected child.
SCOPE_ALL = "all"
SCOPE_BRANCH = "branch"
INHIBITION_SCOPES = (SCOPE_ALL, SCOPE_BRANCH)


@dataclass(frozen=True)
class SpreadMessage:
    target_id: int
    carried_intensity: float
    path: tuple[Hop, ...]  # ends with the sender
    send_time: float
    sender: int
    receiver: int


def repulsion_point(trace: Trace, host_pos) -> tuple[float, float]:
    """Grand-parent, else parent, else the host itself."""
    if trace.path:
        return trace.path[0].pos
    return (float(host_pos[0]), float(host_pos[1]))


def v_rep(network: Network, host: int, rp) -> list[int]:
    """Neighbours of ``host`` strictly farther from ``rp`` than ``host`` is."""
    px, py = rp
    pos = network.positions
    hx, hy = pos[host]
    own = math.hypot(hx - px, hy - py)
    out = []
    for m in network.adjacency[host]:
        mx, my = pos[m]
        if math.hypot(mx - px, my - py) > own:
            out.append(m)
    return out


def select_spread_targets(network: Network, candidates: list[int], rp, rng: np.random.Generator) -> list[int]:
    """Pick ``[n1, n2]`` from ``candidates`` (which must be sorted by id).

    n2 is the candidate farthest from ``rp`` (lowest id on ties); n1 is
    uniform over the rest. Fewer candidates give fewer children.
    """
    if not candidates:
        return []
    px, py = rp
    pos = network.positions
    far, far_d = candidates[0], -1.0
    for m in candidates:
        d = math.hypot(pos[m][0] - px, pos[m][1] - py)
        if d > far_d:
            far, far_d = m, d
    rest = [m for m in candidates if m != far]
    if not rest:
        return [far]
    n1 = rest[int(rng.integers(len(rest)))] if len(rest) > 1 else rest[0]
    return [n1, far]


def is_inhibited(
    policy: str,
    store: TraceStore,
    candidates: list[int],
    target_id: int,
    t: float,
    host_intensity: float,
    carried: float,
    parent: int | None = None,
) -> bool:
    if policy == INHIBIT_NONE:
        return False
    for m in candidates:
        tr = store.get(m, target_id, t)
        if tr is None:
            continue
        if policy == INHIBIT_ANY:
            return True
        i = store.intensity(m, target_id, t)
        if policy == INHIBIT_CARRIED and i >= carried:
            return True
        if policy == INHIBIT_OVERLAP and i >= carried and (parent is None or tr.parent != parent):
            return True
        if policy == INHIBIT_STRONGER and i > host_intensity:
            return True
    return False


def spread(
    network: Network,
    store: TraceStore,
    host: int,
    target_id: int,
    t: float,
    rng: np.random.Generator,
    penalty: float = 1.0,
    inhibition: str = INHIBIT_CARRIED,
    scope: str = SCOPE_ALL,
) -> list[SpreadMessage]:
    """Messages ``host`` sends when forwarding its trace for ``target_id`` at ``t``."""
    tr = store.get(host, target_id, t)
    if tr is None:
        return []
    intensity = store.intensity(host, target_id, t)
    carried = intensity - penalty
    if carried <= 0:
        return []
    host_pos = network.positions[host]
    rp = repulsion_point(tr, host_pos)
    cands = v_rep(network, host, rp)
    if not cands:
        return []
    if scope == SCOPE_ALL and is_inhibited(inhibition, store, cands, target_id, t, intensity, carried, tr.parent):
        return []
    children = select_spread_targets(network, cands, rp, rng)
    if scope == SCOPE_BRANCH:
        children = [
            m for m in children
            if not is_inhibited(inhibition, store, [m], target_id, t, intensity, carried, tr.parent)
        ]
    me = Hop(host, (float(host_pos[0]), float(host_pos[1])))
    path = (tr.path[-1], me) if tr.path else (me,)
    return [SpreadMessage(target_id, carried, path, t, host, m) for m in children]


def deliver(store: TraceStore, msg: SpreadMessage, t: float) -> Trace | None:
    """Store ``msg`` at its receiver; ``None`` if the receiver already has a live trace."""
    return store.store_spread(msg.receiver, msg.target_id, t, msg.carried_intensity, msg.path)
