"""Node placement, unit-disc communication graph and planar primitives."""

from __future__ import annotations

import math
from collections import defaultdict, deque
from dataclasses import dataclass
from pathlib import Path

import numpy as np

# Density values are written as k / (100^2 * 3.14) with a truncated pi, so
# derived side lengths land on the same numbers as the hand arithmetic.
PI_APPROX = 3.14


def density_from_neighbours(k: float, radius: float = 100.0) -> float:
    """Density giving about ``k`` expected neighbours in a disc of ``radius``."""
    return k / (radius**2 * PI_APPROX)


def side_from_density(n: int, density: float) -> float:
    if n <= 0:
        raise ValueError(f"n must be positive, got {n}")
    if density <= 0:
        raise ValueError(f"density must be positive, got {density}")
    return math.sqrt(n / density)


def place_nodes(n: int, side: float, rng: np.random.Generator) -> np.ndarray:
    """``n`` i.i.d. uniform points in ``[0, side]^2`` as an ``(n, 2)`` array."""
    if n <= 0 or side <= 0:
        raise ValueError("n and side must be positive")
    return rng.random((n, 2)) * side


def build_udg(positions: np.ndarray, d_trx: float) -> list[list[int]]:
    """Unit-disc adjacency lists (sorted) using a uniform grid of cell size d_trx."""
    if d_trx <= 0:
        raise ValueError("d_trx must be positive")
    pos = np.asarray(positions, dtype=float)
    n = len(pos)
    cells: dict[tuple[int, int], list[int]] = defaultdict(list)
    keys = np.floor(pos / d_trx).astype(np.int64)
    for i, (cx, cy) in enumerate(keys.tolist()):
        cells[(cx, cy)].append(i)

    r2 = d_trx * d_trx
    adj: list[list[int]] = [[] for _ in range(n)]
    for (cx, cy), members in cells.items():
        cand = []
        for dx in (-1, 0, 1):
            for dy in (-1, 0, 1):
                cand.extend(cells.get((cx + dx, cy + dy), ()))
        cand_arr = np.asarray(cand, dtype=np.int64)
        cpos = pos[cand_arr]
        for i in members:
            d2 = ((cpos - pos[i]) ** 2).sum(axis=1)
            hits = cand_arr[(d2 <= r2) & (cand_arr != i)]
            adj[i] = sorted(hits.tolist())
    return adj


def build_udg_bruteforce(positions: np.ndarray, d_trx: float) -> list[list[int]]:
    """All-pairs O(n^2) reference for :func:`build_udg`."""
    pos = np.asarray(positions, dtype=float)
    d2 = ((pos[:, None, :] - pos[None, :, :]) ** 2).sum(axis=2)
    mask = d2 <= d_trx * d_trx
    np.fill_diagonal(mask, False)
    return [np.flatnonzero(row).tolist() for row in mask]


def point_segment_distance(p, a, b) -> tuple[float, tuple[float, float]]:
    """Distance from ``p`` to segment ``ab`` and the closest point on it."""
    px, py = float(p[0]), float(p[1])
    ax, ay = float(a[0]), float(a[1])
    bx, by = float(b[0]), float(b[1])
    vx, vy = bx - ax, by - ay
    seg2 = vx * vx + vy * vy
    if seg2 == 0.0:
        return math.hypot(px - ax, py - ay), (ax, ay)
    s = ((px - ax) * vx + (py - ay) * vy) / seg2
    s = min(1.0, max(0.0, s))
    fx, fy = ax + s * vx, ay + s * vy
    return math.hypot(px - fx, py - fy), (fx, fy)


@dataclass(frozen=True)
class Network:
    positions: np.ndarray
    adjacency: list[list[int]]
    d_trx: float
    side: float

    @classmethod
    def random(cls, n: int, side: float, d_trx: float, rng: np.random.Generator) -> "Network":
        pos = place_nodes(n, side, rng)
        return cls(pos, build_udg(pos, d_trx), d_trx, side)

    @classmethod
    def from_positions(cls, positions, d_trx: float, side: float | None = None) -> "Network":
        pos = np.asarray(positions, dtype=float).reshape(-1, 2)
        if side is None:
            side = float(pos.max()) if len(pos) else 0.0
        return cls(pos, build_udg(pos, d_trx), d_trx, side)

    def __len__(self) -> int:
        return len(self.positions)

    def dist(self, i: int, j: int) -> float:
        (x1, y1), (x2, y2) = self.positions[i], self.positions[j]
        return math.hypot(x1 - x2, y1 - y2)

    def nearest_node(self, point) -> int:
        d2 = ((self.positions - np.asarray(point, dtype=float)) ** 2).sum(axis=1)
        return int(np.argmin(d2))

    def components(self) -> list[list[int]]:
        seen = [False] * len(self)
        comps = []
        for s in range(len(self)):
            if seen[s]:
                continue
            seen[s] = True
            comp, queue = [], deque([s])
            while queue:
                u = queue.popleft()
                comp.append(u)
                for v in self.adjacency[u]:
                    if not seen[v]:
                        seen[v] = True
                        queue.append(v)
            comps.append(comp)
        return comps

    def component_of(self, node: int) -> list[int]:
        for comp in self.components():
            if node in comp:
                return comp
        raise IndexError(node)

    def giant_component_fraction(self) -> float:
        if len(self) == 0:
            return 0.0
        return max(len(c) for c in self.components()) / len(self)

    def hop_diameter_estimate(self) -> int:
        """Hops needed to cross the square diagonally at full radio range."""
        return max(1, math.ceil(self.side * math.sqrt(2) / self.d_trx))

    def edges(self):
        for i, nbrs in enumerate(self.adjacency):
            for j in nbrs:
                if i < j:
                    yield i, j

    def write_edge_list(self, path) -> None:
        with open(Path(path), "w", encoding="utf-8") as fh:
            for i, j in self.edges():
                fh.write(f"{i} {j}\n")
