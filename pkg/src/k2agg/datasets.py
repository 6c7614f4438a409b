"""Synthetic weighted grids: uniform scatter or Gaussian clusters."""
from __future__ import annotations

import math

import numpy as np

from .grid import WeightedPointSet

MAX_ROUNDS = 64


def default_sigma(s: int, t: int, c: int) -> float:
    """Cluster spread: narrow for sparse grids, wide enough to fit ``t`` distinct cells otherwise."""
    return max(1.0, s / (16.0 * math.sqrt(c)), math.sqrt(t / (c * math.pi)))


def gen(s: int, p: float, d: int, c: int = 0, seed: int = 0,
        sigma: float | None = None) -> WeightedPointSet:
    """Random ``s x s`` grid with ``round(s*s*p/100)`` non-empty cells and weights in ``[0, d)``.

    ``c == 0`` scatters points uniformly. ``c > 0`` draws them around ``c``
    uniformly placed centres with standard deviation ``sigma``; duplicate cells
    are redrawn, and if the clusters saturate the remainder is filled uniformly.
    """
    if s < 1 or s & (s - 1):
        raise ValueError(f"grid side must be a power of two, got {s}")
    if not 0 < p <= 100:
        raise ValueError(f"density must be in (0, 100], got {p}")
    if d < 1:
        raise ValueError("weight domain must be >= 1")
    if c < 0:
        raise ValueError("cluster count must be >= 0")
    rng = np.random.default_rng(seed)
    area = s * s
    t = int(round(area * p / 100.0))
    if t > area:
        raise ValueError("density exceeds the grid")
    if c == 0:
        cells = rng.choice(area, size=t, replace=False) if t else np.zeros(0, np.int64)
    else:
        cells = _clustered(rng, s, t, c, default_sigma(s, t, c) if sigma is None else sigma)
    cells = np.asarray(cells, dtype=np.int64)
    ws = rng.integers(0, d, size=len(cells), dtype=np.int64)
    return WeightedPointSet(cells % s, cells // s, ws, rows=s, cols=s, d=d)


def _clustered(rng, s: int, t: int, c: int, sigma: float) -> np.ndarray:
    centres = rng.uniform(0, s, size=(c, 2))
    have = np.zeros(0, np.int64)
    for _ in range(MAX_ROUNDS):
        need = t - len(have)
        if need <= 0:
            break
        m = int(need * 1.25) + 16
        pick = rng.integers(0, c, size=m)
        pts = np.rint(centres[pick] + rng.normal(0.0, sigma, size=(m, 2))).astype(np.int64)
        ok = (pts >= 0).all(axis=1) & (pts < s).all(axis=1)
        pts = pts[ok]
        merged = np.concatenate([have, pts[:, 1] * s + pts[:, 0]])
        _, first = np.unique(merged, return_index=True)
        have = merged[np.sort(first)][:t]
    if len(have) < t:
        free = np.setdiff1d(np.arange(s * s, dtype=np.int64), have, assume_unique=True)
        have = np.concatenate([have, rng.choice(free, size=t - len(have), replace=False)])
    return have
