"""Per-node trace tables with lazy linear attenuation."""

from __future__ import annotations

import csv
import enum
from dataclasses import dataclass
from typing import NamedTuple

MAX_INTENSITY = 300.0


class TraceType(enum.Enum):
    INITIAL = "INITIAL"
    SPREAD = "SPREAD"


class Hop(NamedTuple):
    node: int
    pos: tuple[float, float]


@dataclass
class Trace:
    type: TraceType
    start_time: float  # node-local clock
    start_intensity: float
    target_id: int
    path: tuple[Hop, ...] = ()  # oldest first, at most two entries

    def __post_init__(self):
        if len(self.path) > 2:
            raise ValueError("a trace keeps at most two path hops")
        if (self.type is TraceType.INITIAL) != (not self.path):
            raise ValueError("INITIAL traces, and only they, have an empty path")

    @property
    def parent(self) -> int | None:
        return self.path[-1].node if self.path else None


def intensity_at(trace: Trace, t: float, decay_rate: float = 1.0) -> float:
    """Linear decay: ``max(0, start_intensity - (t - start_time) * decay_rate)``."""
    if t < trace.start_time:
        raise ValueError(f"query time {t} precedes trace start {trace.start_time}")
    return max(0.0, trace.start_intensity - (t - trace.start_time) * decay_rate)


class TraceRecord(NamedTuple):
    """One trace creation, kept for offline checks and tree export."""

    node: int
    target_id: int
    type: TraceType
    time: float  # global clock
    start_intensity: float
    parent: int | None


class TraceStore:
    """Trace tables for every node, at most one trace per target per node.

    Expiry is lazy: a trace whose intensity has reached zero is removed the
    next time anything reads it.
    """

    def __init__(
        self,
        n: int,
        max_intensity: float = MAX_INTENSITY,
        decay_rate: float = 1.0,
        clock_offsets=None,
        keep_history: bool = False,
    ):
        self.tables: list[dict[int, Trace]] = [{} for _ in range(n)]
        self.max_intensity = max_intensity
        self.decay_rate = decay_rate
        self.offsets = list(clock_offsets) if clock_offsets is not None else None
        self.history: list[TraceRecord] | None = [] if keep_history else None

    def local_time(self, node: int, t: float) -> float:
        return t if self.offsets is None else t + self.offsets[node]

    def expire_check(self, node: int, target_id: int, t: float) -> bool:
        table = self.tables[node]
        tr = table.get(target_id)
        if tr is None:
            return False
        if intensity_at(tr, self.local_time(node, t), self.decay_rate) <= 0.0:
            del table[target_id]
            return True
        return False

    def get(self, node: int, target_id: int, t: float) -> Trace | None:
        self.expire_check(node, target_id, t)
        return self.tables[node].get(target_id)

    def intensity(self, node: int, target_id: int, t: float) -> float:
        tr = self.get(node, target_id, t)
        if tr is None:
            return 0.0
        return intensity_at(tr, self.local_time(node, t), self.decay_rate)

    def record_detection(self, node: int, target_id: int, t: float) -> Trace:
        tr = Trace(TraceType.INITIAL, self.local_time(node, t), self.max_intensity, target_id)
        self.tables[node][target_id] = tr
        self._log(node, tr, t)
        return tr

    def store_spread(self, node: int, target_id: int, t: float, intensity: float, path) -> Trace | None:
        """Store a received spread unless a live trace is already present."""
        if self.get(node, target_id, t) is not None:
            return None
        tr = Trace(TraceType.SPREAD, self.local_time(node, t), intensity, target_id, tuple(path))
        self.tables[node][target_id] = tr
        self._log(node, tr, t)
        return tr

    def _log(self, node: int, tr: Trace, t: float) -> None:
        if self.history is not None:
            self.history.append(
                TraceRecord(node, tr.target_id, tr.type, t, tr.start_intensity, tr.parent)
            )

    def snapshot(self, t: float) -> list[tuple[int, int, str, float]]:
        """(node, target, type, current intensity) for every live trace."""
        rows = []
        for node in range(len(self.tables)):
            for target_id in sorted(self.tables[node]):
                tr = self.get(node, target_id, t)
                if tr is not None:
                    i = intensity_at(tr, self.local_time(node, t), self.decay_rate)
                    rows.append((node, target_id, tr.type.value, i))
        return rows


def write_snapshots_csv(path, snapshots) -> None:
    """``snapshots`` is an iterable of ``(time, rows)`` pairs from :meth:`TraceStore.snapshot`."""
    with open(path, "w", newline="", encoding="utf-8") as fh:
        w = csv.writer(fh)
        w.writerow(["time_s", "node", "target", "type", "intensity"])
        for t, rows in snapshots:
            for node, target, typ, inten in rows:
                w.writerow([repr(float(t)), node, target, typ, repr(float(inten))])
