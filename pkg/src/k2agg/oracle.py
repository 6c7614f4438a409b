"""Brute-force reference answers over an uncompressed grid.

Everything here scans the cells of the query window directly. It exists to
check the compact structures and is capped at 4096 x 4096.
"""
from __future__ import annotations

import numpy as np

from .grid import QueryRect, WeightedPointSet, zorder_codes

MAX_SIDE = 4096
EMPTY = -1


class DenseGrid:
    """``cells[y, x]`` holds the weight of cell (x, y), or ``-1`` when empty."""

    def __init__(self, cells: np.ndarray):
        cells = np.asarray(cells, dtype=np.int64)
        if cells.ndim != 2:
            raise ValueError("cells must be a 2-D array")
        if max(cells.shape) > MAX_SIDE:
            raise ValueError(f"oracle grids are capped at {MAX_SIDE} per side")
        if (cells < EMPTY).any():
            raise ValueError("weights must be non-negative")
        self.cells = cells
        self.cells.flags.writeable = False
        self.rows, self.cols = cells.shape
        self.n = max(self.rows, self.cols)

    @classmethod
    def from_points(cls, points: WeightedPointSet) -> "DenseGrid":
        return cls(points.to_dense())

    def _window(self, q: QueryRect):
        q = QueryRect(*q).validate()
        x2, y2 = min(q.x2, self.cols - 1), min(q.y2, self.rows - 1)
        if q.x1 > x2 or q.y1 > y2:
            return np.zeros((0, 0), np.int64), q.x1, q.y1
        return self.cells[q.y1:y2 + 1, q.x1:x2 + 1], q.x1, q.y1

    def points_in(self, q: QueryRect) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
        """Columns, rows and weights of the points in ``q``, in row-major order."""
        win, x0, y0 = self._window(q)
        yy, xx = np.nonzero(win >= 0)
        return xx + x0, yy + y0, win[yy, xx]

    def o_count(self, q: QueryRect) -> int:
        win, _, _ = self._window(q)
        return int((win >= 0).sum())

    def o_sum(self, q: QueryRect) -> int:
        win, _, _ = self._window(q)
        return int(win[win >= 0].sum())

    def o_max(self, q: QueryRect) -> int | None:
        win, _, _ = self._window(q)
        return int(win.max()) if win.size and win.max() >= 0 else None

    def o_min(self, q: QueryRect) -> int | None:
        win, _, _ = self._window(q)
        w = win[win >= 0]
        return int(w.min()) if w.size else None

    def o_report(self, q: QueryRect) -> list[tuple[int, int, int]]:
        """Points in ``q`` as ``(x, y, w)`` in Z-order."""
        xs, ys, ws = self.points_in(q)
        order = np.argsort(zorder_codes(xs, ys), kind="stable")
        return list(zip(xs[order].tolist(), ys[order].tolist(), ws[order].tolist()))

    def o_topk(self, q: QueryRect, k: int) -> list[tuple[int, int, int]]:
        """The ``k`` heaviest points in ``q``, heaviest first, ties in Z-order."""
        if k < 1:
            raise ValueError("k must be >= 1")
        xs, ys, ws = self.points_in(q)
        order = np.lexsort((zorder_codes(xs, ys), -ws))[:k]
        return list(zip(xs[order].tolist(), ys[order].tolist(), ws[order].tolist()))

    def o_interval(self, q: QueryRect, lo: int, hi: int) -> list[tuple[int, int, int]]:
        """Points in ``q`` with ``lo <= w <= hi``, in Z-order."""
        return [p for p in self.o_report(q) if lo <= p[2] <= hi]
