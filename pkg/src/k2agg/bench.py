"""Query-set generation and timing for the compact indexes."""
from __future__ import annotations

import csv
import math
import time
from dataclasses import dataclass

import numpy as np

from .grid import QueryRect
from .k2tree import K2Tree
from .k2treap import K2Treap
from .rck2tree import CountingK2Tree

ORIENTATIONS = ("square", "row", "col")
CSV_FIELDS = ("structure", "op", "window", "k", "queries", "mean_us", "p50_us", "p99_us",
              "bits_per_cell", "bits_per_point")


@dataclass(frozen=True)
class BenchSpec:
    """One query set: ``queries`` windows of side ``w`` or covering ``selectivity`` % of the grid.

    ``orientation`` turns windows into single rows (``"row"``) or single
    columns (``"col"``) of the same cell count.
    """

    queries: int = 1000
    w: int | None = None
    selectivity: float | None = None
    k: int = 10
    seed: int = 0
    orientation: str = "square"
    wrange: tuple[int, int] | None = None

    def __post_init__(self):
        if (self.w is None) == (self.selectivity is None):
            raise ValueError("give exactly one of w or selectivity")
        if self.w is not None and self.w < 1:
            raise ValueError("window side must be >= 1")
        if self.selectivity is not None and not 0 < self.selectivity <= 100:
            raise ValueError("selectivity must be in (0, 100]")
        if self.orientation not in ORIENTATIONS:
            raise ValueError(f"orientation must be one of {ORIENTATIONS}")
        if self.queries < 1 or self.k < 1:
            raise ValueError("queries and k must be >= 1")

    @property
    def label(self) -> str:
        base = f"w={self.w}" if self.w is not None else f"X={self.selectivity:g}%"
        return base if self.orientation == "square" else f"{base},{self.orientation}"

    def window_shape(self, s: int) -> tuple[int, int]:
        """(width, height) of every window on an ``s x s`` grid."""
        if self.w is not None:
            cells = self.w * self.w
            side = min(self.w, s)
        else:
            cells = max(1, math.floor(s * s * self.selectivity / 100.0))
            side = min(s, max(1, round(math.sqrt(cells))))
        if self.orientation == "row":
            return min(s, cells), 1
        if self.orientation == "col":
            return 1, min(s, cells)
        return side, side

    def windows(self, s: int) -> list[QueryRect]:
        """Deterministic query windows placed uniformly at random inside the grid."""
        wd, ht = self.window_shape(s)
        rng = np.random.default_rng(self.seed)
        x0 = rng.integers(0, s - wd + 1, size=self.queries)
        y0 = rng.integers(0, s - ht + 1, size=self.queries)
        return [QueryRect(int(x), int(x) + wd - 1, int(y), int(y) + ht - 1)
                for x, y in zip(x0, y0)]


def structure_name(index) -> str:
    if isinstance(index, K2Treap):
        return "k2treap" if index.order == "max" else "k2treap-min"
    if isinstance(index, CountingK2Tree):
        return f"rck2tree{index.aug_levels}-{index.mode}"
    if isinstance(index, K2Tree):
        return "k2tree"
    raise TypeError(f"unsupported index {type(index).__name__}")


def supported_ops(index) -> tuple[str, ...]:
    if isinstance(index, K2Treap):
        ext = "max" if index.order == "max" else "min"
        return ("top", ext, "report", "interval")
    if isinstance(index, CountingK2Tree):
        return (index.mode, "report")
    return ("count", "report")


def query_fn(index, op: str, k: int = 10, wrange: tuple[int, int] | None = None):
    """A callable ``f(q)`` running ``op`` on ``index``; raises if the pair is incompatible."""
    if op not in supported_ops(index):
        raise ValueError(f"{structure_name(index)} does not support op {op!r}; "
                         f"choose from {', '.join(supported_ops(index))}")
    if isinstance(index, K2Treap):
        if op == "top":
            return lambda q: index.top_k(q, k)
        if op in ("max", "min"):
            return index.max
        if op == "report":
            return index.range_report_arrays
        lo, hi = wrange if wrange is not None else (0, max(index.d - 1, 0))
        return lambda q: index.interval_arrays(q, lo, hi)
    if isinstance(index, CountingK2Tree):
        if op == "report":
            return index.base.report_arrays
        return index.count if op == "count" else index.sum
    if op == "count":
        return index.count_by_traversal
    return index.report_arrays


def space(index) -> tuple[int, int, int, int]:
    """(total bits, rows, cols, points) of the original, unpadded grid."""
    base = index.base if isinstance(index, CountingK2Tree) else index
    return index.size_in_bits(), base.rows, base.cols, index.t


def run(index, op: str, spec: BenchSpec) -> dict:
    """Time every window of ``spec`` once, after warming up on the first few, and summarize."""
    bits, rows, cols, t = space(index)
    fn = query_fn(index, op, spec.k, spec.wrange)
    wins = spec.windows(min(rows, cols))
    for q in wins[: min(len(wins), 50)]:
        fn(q)
    times = np.empty(len(wins), dtype=np.float64)
    clock = time.perf_counter_ns
    for i, q in enumerate(wins):
        t0 = clock()
        fn(q)
        times[i] = clock() - t0
    us = times / 1000.0
    return {
        "structure": structure_name(index), "op": op, "window": spec.label,
        "k": spec.k if op == "top" else "", "queries": len(wins),
        "mean_us": round(float(us.mean()), 3),
        "p50_us": round(float(np.percentile(us, 50)), 3),
        "p99_us": round(float(np.percentile(us, 99)), 3),
        "bits_per_cell": round(bits / (rows * cols), 6),
        "bits_per_point": round(bits / t, 6) if t else float("nan"),
    }


def write_csv(rows, out) -> None:
    w = csv.DictWriter(out, fieldnames=CSV_FIELDS, lineterminator="\n")
    w.writeheader()
    for r in rows:
        w.writerow(r)
