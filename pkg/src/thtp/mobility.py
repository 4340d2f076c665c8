"""Random-waypoint motion and continuous-time target detection."""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np


def kmh_to_mps(v: float) -> float:
    return v / 3.6


@dataclass(frozen=True)
class MotionLeg:
    a: tuple[float, float]
    b: tuple[float, float]
    t0: float
    t1: float
    speed: float

    @property
    def length(self) -> float:
        return math.hypot(self.b[0] - self.a[0], self.b[1] - self.a[1])

    def position_at(self, t: float) -> tuple[float, float]:
        if not (self.t0 <= t <= self.t1):
            raise ValueError(f"t={t} outside leg span [{self.t0}, {self.t1}]")
        if self.t1 == self.t0:
            return self.a
        f = (t - self.t0) / (self.t1 - self.t0)
        return (
            self.a[0] + f * (self.b[0] - self.a[0]),
            self.a[1] + f * (self.b[1] - self.a[1]),
        )


def make_leg(a, b, t0: float, speed: float, dwell: float = 0.0) -> MotionLeg:
    """Leg from ``a`` to ``b`` starting at ``t0``.

    A zero-speed entity (a parked sink) gets a leg of duration ``dwell``
    that stays at ``a``.
    """
    a = (float(a[0]), float(a[1]))
    b = (float(b[0]), float(b[1]))
    if speed <= 0:
        return MotionLeg(a, a, t0, t0 + dwell, 0.0)
    d = math.hypot(b[0] - a[0], b[1] - a[1])
    return MotionLeg(a, b, t0, t0 + d / speed, speed)


@dataclass
class MobileEntity:
    """A random-waypoint walker: the target, or the mobile sink."""

    id: int
    role: str  # "target" or "sink"
    speed: float  # m/s
    leg: MotionLeg
    dwell: float = 60.0  # leg duration when speed == 0

    @classmethod
    def start(cls, id: int, role: str, speed: float, pos, t: float = 0.0, dwell: float = 60.0):
        pos = (float(pos[0]), float(pos[1]))
        return cls(id, role, speed, MotionLeg(pos, pos, t, t, speed), dwell)

    @property
    def position(self) -> tuple[float, float]:
        """Position at the end of the current leg."""
        return self.leg.b

    def position_at(self, t: float) -> tuple[float, float]:
        return self.leg.position_at(t)


def next_leg(entity: MobileEntity, rng: np.random.Generator, side: float, t: float) -> MotionLeg:
    """Draw a fresh waypoint and install the leg that heads there from ``t``.

    Waypoints equal to the current position are redrawn. Pause time is zero.
    """
    here = entity.position
    if entity.speed <= 0:
        leg = make_leg(here, here, t, 0.0, entity.dwell)
    else:
        while True:
            wp = rng.random(2) * side
            if wp[0] != here[0] or wp[1] != here[1]:
                break
        leg = make_leg(here, wp, t, entity.speed)
    entity.leg = leg
    return leg


def leg_detections(leg: MotionLeg, positions: np.ndarray, d_dtx: float) -> list[tuple[int, float]]:
    """Nodes within ``d_dtx`` of the leg and their closest-approach times.

    Result is sorted by (time, node id).
    """
    if d_dtx <= 0:
        raise ValueError("d_dtx must be positive")
    pos = np.asarray(positions, dtype=float)
    if len(pos) == 0:
        return []
    a = np.asarray(leg.a)
    v = np.asarray(leg.b) - a
    seg2 = float(v @ v)
    rel = pos - a
    if seg2 == 0.0:
        s = np.zeros(len(pos))
    else:
        s = np.clip(rel @ v / seg2, 0.0, 1.0)
    foot = a + s[:, None] * v
    d = np.hypot(pos[:, 0] - foot[:, 0], pos[:, 1] - foot[:, 1])
    hit = np.flatnonzero(d <= d_dtx)
    times = leg.t0 + s[hit] * (leg.t1 - leg.t0)
    out = sorted(zip(times.tolist(), hit.tolist()))
    return [(node, t) for t, node in out]
