"""Shared test data: the 8x8 running example and small reference builders."""
from __future__ import annotations

from collections import deque

import numpy as np

from k2agg import QueryRect, WeightedPointSet

# Rows top to bottom, -1 = empty; weights in [0, 8].
RUNNING = np.array([
    [-1, 3, 8, -1, -1, -1, -1, -1],
    [1, -1, -1, 2, -1, -1, -1, -1],
    [4, -1, 1, 6, -1, -1, -1, -1],
    [2, 2, -1, 5, -1, -1, -1, -1],
    [6, -1, -1, 3, 7, -1, -1, 2],
    [-1, 1, -1, -1, -1, -1, 1, -1],
    [2, -1, 2, -1, -1, -1, -1, 3],
    [-1, 4, -1, 1, -1, 5, -1, -1],
])
RUNNING_D = 9
# columns 1..4, rows 4..7, as (x1, x2, y1, y2)
RUNNING_QUERY = QueryRect(1, 4, 4, 7)


def running_points() -> WeightedPointSet:
    return WeightedPointSet.from_dense(RUNNING, d=RUNNING_D)


def naive_k2_bits(occupied: np.ndarray, ks) -> list[list[int]]:
    """Level-order child bits by explicit breadth-first recursion over submatrices."""
    n = 1
    for k in ks:
        n *= k
    grid = np.zeros((n, n), dtype=bool)
    grid[: occupied.shape[0], : occupied.shape[1]] = occupied
    levels = [[] for _ in ks]
    queue = deque([(0, 0, 0)])  # level, row origin, col origin
    side = [n]
    for k in ks:
        side.append(side[-1] // k)
    while queue:
        lvl, r0, c0 = queue.popleft()
        k, s = ks[lvl], side[lvl + 1]
        for i in range(k):
            for j in range(k):
                sub = grid[r0 + i * s: r0 + (i + 1) * s, c0 + j * s: c0 + (j + 1) * s]
                bit = int(sub.any())
                levels[lvl].append(bit)
                if bit and lvl + 1 < len(ks):
                    queue.append((lvl + 1, r0 + i * s, c0 + j * s))
    return levels


def random_grid(rng, s: int, density: float, d: int) -> WeightedPointSet:
    mask = rng.random((s, s)) < density
    cells = np.where(mask, rng.integers(0, d, (s, s)), -1)
    return WeightedPointSet.from_dense(cells, d=d)


def random_rects(rng, s: int, m: int) -> list[QueryRect]:
    xs = np.sort(rng.integers(0, s, (m, 2)), axis=1)
    ys = np.sort(rng.integers(0, s, (m, 2)), axis=1)
    return [QueryRect(int(a), int(b), int(c), int(e)) for (a, b), (c, e) in zip(xs, ys)]
