"""Point sets, per-level branching schedules, query rectangles and Morton codes.

Coordinates follow the (x, y) = (column, row) convention throughout. Child
submatrices are numbered left-to-right, top-to-bottom, so the digit of a cell
at a level with branching ``k`` is ``row_digit * k + col_digit``.
"""
from __future__ import annotations

from dataclasses import dataclass
from typing import Iterable, NamedTuple, Sequence

import numpy as np


class WeightedPointSet:
    """Cells of a ``rows x cols`` grid holding integer weights in ``[0, d-1]``.

    Arrays are stored as int64 and never modified after construction.
    """

    __slots__ = ("xs", "ys", "ws", "rows", "cols", "d")

    def __init__(self, xs, ys, ws=None, rows=None, cols=None, d=None):
        xs = np.asarray(xs, dtype=np.int64).ravel()
        ys = np.asarray(ys, dtype=np.int64).ravel()
        if ws is None:
            ws = np.ones(len(xs), dtype=np.int64)
        ws = np.asarray(ws, dtype=np.int64).ravel()
        if not (len(xs) == len(ys) == len(ws)):
            raise ValueError("xs, ys and ws must have the same length")
        if rows is None:
            rows = int(ys.max()) + 1 if len(ys) else 1
        if cols is None:
            cols = int(xs.max()) + 1 if len(xs) else 1
        if d is None:
            d = int(ws.max()) + 1 if len(ws) else 1
        if rows < 1 or cols < 1:
            raise ValueError("grid dimensions must be positive")
        if len(xs):
            if xs.min() < 0 or xs.max() >= cols or ys.min() < 0 or ys.max() >= rows:
                raise ValueError(f"coordinate outside the {rows}x{cols} grid")
            if ws.min() < 0 or ws.max() >= d:
                raise ValueError(f"weight outside [0, {d - 1}]")
            flat = ys * cols + xs
            if len(np.unique(flat)) != len(flat):
                dup = _first_duplicate(flat)
                raise ValueError(f"duplicate cell ({dup % cols}, {dup // cols})")
        for a in (xs, ys, ws):
            a.flags.writeable = False
        self.xs, self.ys, self.ws = xs, ys, ws
        self.rows, self.cols, self.d = int(rows), int(cols), int(d)

    def __len__(self) -> int:
        return len(self.xs)

    def __repr__(self) -> str:
        return f"WeightedPointSet(t={len(self)}, rows={self.rows}, cols={self.cols}, d={self.d})"

    @classmethod
    def from_dense(cls, cells, d=None) -> "WeightedPointSet":
        """Build from a 2D array indexed ``[row, col]``; negative entries are empty."""
        cells = np.asarray(cells, dtype=np.int64)
        ys, xs = np.nonzero(cells >= 0)
        return cls(xs, ys, cells[ys, xs], rows=cells.shape[0], cols=cells.shape[1], d=d)

    @classmethod
    def from_tuples(cls, points: Iterable[Sequence[int]], rows=None, cols=None, d=None):
        pts = [tuple(p) for p in points]
        if not pts:
            return cls([], [], [], rows=rows, cols=cols, d=d)
        xs = [p[0] for p in pts]
        ys = [p[1] for p in pts]
        ws = [p[2] if len(p) > 2 else 1 for p in pts]
        return cls(xs, ys, ws, rows=rows, cols=cols, d=d)

    def to_dense(self) -> np.ndarray:
        cells = np.full((self.rows, self.cols), -1, dtype=np.int64)
        cells[self.ys, self.xs] = self.ws
        return cells

    def with_weights(self, ws, d=None) -> "WeightedPointSet":
        return WeightedPointSet(self.xs, self.ys, ws, rows=self.rows, cols=self.cols,
                                d=self.d if d is None else d)

    def tuples(self) -> list[tuple[int, int, int]]:
        return list(zip(self.xs.tolist(), self.ys.tolist(), self.ws.tolist()))


def _first_duplicate(flat: np.ndarray) -> int:
    s = np.sort(flat)
    return int(s[np.nonzero(s[1:] == s[:-1])[0][0]])


@dataclass(frozen=True)
class KSchedule:
    """Branching factor per tree level, as ``(k, repetitions)`` runs from the root down."""

    entries: tuple[tuple[int, int], ...]

    def __post_init__(self):
        entries = tuple((int(k), int(r)) for k, r in self.entries)
        if not entries:
            raise ValueError("schedule needs at least one entry")
        for k, r in entries:
            if k < 2 or r < 1:
                raise ValueError(f"invalid schedule entry ({k}, {r})")
        object.__setattr__(self, "entries", entries)

    @classmethod
    def uniform(cls, k: int, side: int) -> "KSchedule":
        levels, n = 1, k
        while n < side:
            n *= k
            levels += 1
        return cls(((k, levels),))

    @classmethod
    def hybrid(cls, side: int, k1: int = 4, top: int = 6, k2: int = 2) -> "KSchedule":
        """``k1`` for up to ``top`` upper levels, then ``k2`` until the grid is covered."""
        h, n = 0, 1
        while h < top and n * k1 <= side:
            n *= k1
            h += 1
        rest = 0
        while n < side or h + rest == 0:
            n *= k2
            rest += 1
        entries = []
        if h:
            entries.append((k1, h))
        if rest:
            entries.append((k2, rest))
        return cls(tuple(entries))

    @classmethod
    def parse(cls, text: str) -> "KSchedule":
        """Parse ``"4x6,2x3"`` style schedules."""
        entries = []
        for part in text.split(","):
            k, _, r = part.strip().partition("x")
            entries.append((int(k), int(r) if r else 1))
        return cls(tuple(entries))

    def __str__(self) -> str:
        return ",".join(f"{k}x{r}" for k, r in self.entries)

    @property
    def ks(self) -> tuple[int, ...]:
        out: list[int] = []
        for k, r in self.entries:
            out.extend([k] * r)
        return tuple(out)

    @property
    def height(self) -> int:
        return sum(r for _, r in self.entries)

    @property
    def n(self) -> int:
        n = 1
        for k in self.ks:
            n *= k
        return n

    def sides(self) -> np.ndarray:
        """Side of the nodes at conceptual level ``l`` for ``l = 0..height`` (root is ``n``)."""
        out = [self.n]
        for k in self.ks:
            out.append(out[-1] // k)
        return np.asarray(out, dtype=np.int64)


class QueryRect(NamedTuple):
    """Inclusive column range ``[x1, x2]`` and row range ``[y1, y2]``."""

    x1: int
    x2: int
    y1: int
    y2: int

    def validate(self) -> "QueryRect":
        if self.x1 > self.x2 or self.y1 > self.y2:
            raise ValueError(f"empty or inverted rectangle {tuple(self)}")
        return self

    def clamp(self, n: int) -> "QueryRect | None":
        """Clip to ``[0, n-1]``; ``None`` when nothing is left."""
        self.validate()
        r = QueryRect(max(self.x1, 0), min(self.x2, n - 1), max(self.y1, 0), min(self.y2, n - 1))
        if r.x1 > r.x2 or r.y1 > r.y2:
            return None
        return r

    def contains(self, x: int, y: int) -> bool:
        return self.x1 <= x <= self.x2 and self.y1 <= y <= self.y2

    @property
    def area(self) -> int:
        return (self.x2 - self.x1 + 1) * (self.y2 - self.y1 + 1)


def morton_codes(xs, ys, schedule: KSchedule) -> np.ndarray:
    """Mixed-radix Morton code of each cell under ``schedule``; sorts in level order."""
    xs = np.asarray(xs, dtype=np.int64)
    ys = np.asarray(ys, dtype=np.int64)
    sides = schedule.sides()
    code = np.zeros(len(xs), dtype=np.int64)
    for b, k in enumerate(schedule.ks):
        s = sides[b + 1]
        digit = ((ys // s) % k) * k + (xs // s) % k
        code = code * (k * k) + digit
    return code


def zorder_codes(xs, ys) -> np.ndarray:
    """Plain bit-interleaved Z-order (row bit above column bit), schedule independent."""
    xs = np.asarray(xs, dtype=np.uint64)
    ys = np.asarray(ys, dtype=np.uint64)
    code = np.zeros(len(xs), dtype=np.uint64)
    for bit in range(32):
        b = np.uint64(bit)
        code |= ((xs >> b) & np.uint64(1)) << np.uint64(2 * bit)
        code |= ((ys >> b) & np.uint64(1)) << np.uint64(2 * bit + 1)
    return code


def level_radix(schedule: KSchedule) -> np.ndarray:
    """``radix[l]`` = number of distinct code suffixes below conceptual level ``l``."""
    ks = schedule.ks
    radix = np.ones(len(ks) + 1, dtype=np.int64)
    for b in range(len(ks) - 1, -1, -1):
        radix[b] = radix[b + 1] * ks[b] * ks[b]
    return radix
