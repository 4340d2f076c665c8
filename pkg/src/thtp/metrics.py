"""Sampled tracking metrics."""

from __future__ import annotations

import bisect
import csv
import math
from dataclasses import dataclass

NO_NODE = -1

CSV_COLUMNS = (
    "time_s", "n_best", "n_best_estimation", "distance_m", "localized",
    "msgs_spread", "msgs_agent", "msgs_routing",
)


@dataclass(frozen=True)
class MetricRow:
    time: float
    n_best: int
    n_best_estimation: int
    distance: float  # nan while either node is undefined
    localized: bool
    msgs_spread: int
    msgs_agent: int
    msgs_routing: int

    def csv_fields(self) -> list[str]:
        return [
            repr(float(self.time)),
            str(self.n_best),
            str(self.n_best_estimation),
            repr(float(self.distance)),
            str(int(self.localized)),
            str(self.msgs_spread),
            str(self.msgs_agent),
            str(self.msgs_routing),
        ]


class DetectionHistory:
    """Detections of one target in execution order."""

    def __init__(self):
        self.times: list[float] = []
        self.nodes: list[int] = []

    def add(self, t: float, node: int) -> None:
        self.times.append(t)
        self.nodes.append(node)

    @property
    def latest(self) -> int:
        return self.nodes[-1] if self.nodes else NO_NODE

    def n_best(self, t: float) -> int:
        """Node with the most recent detection at or before ``t``."""
        k = bisect.bisect_right(self.times, t)
        return self.nodes[k - 1] if k else NO_NODE


def make_row(t: float, n_best: int, n_est: int, positions, counts: dict) -> MetricRow:
    if n_best == NO_NODE or n_est == NO_NODE:
        dist, loc = math.nan, False
    else:
        (x1, y1), (x2, y2) = positions[n_best], positions[n_est]
        dist = math.hypot(x1 - x2, y1 - y2)
        loc = n_best == n_est
        if loc:
            dist = 0.0
    return MetricRow(t, n_best, n_est, dist, loc, counts["spread"], counts["agent"], counts["routing"])


def write_rows_csv(path, rows) -> None:
    with open(path, "w", newline="", encoding="utf-8") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(CSV_COLUMNS)
        for r in rows:
            w.writerow(r.csv_fields())


def read_rows_csv(path) -> list[MetricRow]:
    with open(path, newline="", encoding="utf-8") as fh:
        rd = csv.DictReader(fh)
        return [
            MetricRow(
                float(d["time_s"]), int(d["n_best"]), int(d["n_best_estimation"]),
                float(d["distance_m"]), d["localized"] == "1", int(d["msgs_spread"]),
                int(d["msgs_agent"]), int(d["msgs_routing"]),
            )
            for d in rd
        ]
