"""Pervasive routing of tracking results back to a (possibly mobile) sink.

The sink leaves traces like a target, under its own id. A result message
either tracks those traces directly ("inverted" tracking) or first runs
greedy geographic forwarding toward the point where the agent started and
only then switches to tracking ("hybrid").
"""

from __future__ import annotations

import csv
import math
from dataclasses import dataclass, field
from typing import Callable

import numpy as np

from .agent import Best, MarkStore, Walker, gradient_hop
from .geometry import Network

INVERTED = "inverted"
HYBRID = "hybrid"
STRATEGIES = (INVERTED, HYBRID)

SINK_ID = -1


@dataclass
class ResultMessage(Walker):
    id: int = 0
    strategy: str = INVERTED
    payload: Best | None = None
    origin: tuple[float, float] = (0.0, 0.0)
    send_time: float = 0.0
    ttl: int = 100
    hops: int = 0
    phase: int = 1  # hybrid only: 1 = geographic, 2 = tracking
    deliver_time: float | None = None
    failed: bool = False
    geo_distances: list = field(default_factory=list)

    @property
    def done(self) -> bool:
        return self.failed or self.deliver_time is not None


def geographic_next(network: Network, current: int, goal) -> int | None:
    """Neighbour strictly closer to ``goal`` than ``current``, closest first."""
    gx, gy = goal
    pos = network.positions
    best, best_d = None, math.hypot(pos[current][0] - gx, pos[current][1] - gy)
    for m in network.adjacency[current]:
        d = math.hypot(pos[m][0] - gx, pos[m][1] - gy)
        if d < best_d:
            best, best_d = m, d
    return best


def route_inverted_tracking(
    msg: ResultMessage,
    network: Network,
    intensity: Callable[[int], float],
    marks: MarkStore,
    t: float,
    rng: np.random.Generator,
    fresh_threshold: float,
) -> int:
    return gradient_hop(msg, network, intensity, marks, t, rng, fresh_threshold)


def route_hybrid(
    msg: ResultMessage,
    network: Network,
    intensity: Callable[[int], float],
    marks: MarkStore,
    t: float,
    rng: np.random.Generator,
    fresh_threshold: float,
) -> int:
    if msg.phase == 1:
        if not msg.geo_distances:
            p = network.positions[msg.current]
            msg.geo_distances.append(math.hypot(p[0] - msg.origin[0], p[1] - msg.origin[1]))
        nxt = geographic_next(network, msg.current, msg.origin)
        if nxt is not None:
            msg.trail.append(msg.current)
            msg.current = nxt
            p = network.positions[nxt]
            msg.geo_distances.append(math.hypot(p[0] - msg.origin[0], p[1] - msg.origin[1]))
            return nxt
        msg.phase = 2
    return route_inverted_tracking(msg, network, intensity, marks, t, rng, fresh_threshold)


def write_delivery_log(path, messages) -> None:
    with open(path, "w", newline="", encoding="utf-8") as fh:
        w = csv.writer(fh)
        w.writerow(["send_time", "deliver_time", "hops", "strategy", "success"])
        for m in messages:
            w.writerow([
                repr(float(m.send_time)),
                "" if m.deliver_time is None else repr(float(m.deliver_time)),
                m.hops,
                m.strategy,
                int(m.deliver_time is not None),
            ])
