"""K2-tree over a binary matrix, with a per-level branching schedule.

Conceptual level ``l`` nodes cover ``side[l] x side[l]`` submatrices; the
root is level 0 and cells are level ``H``. Block ``b`` of the bitmap holds the
child bits of all non-empty level-``b`` nodes, in level order. Blocks
``0..H-2`` form ``T``, block ``H-1`` (the cells) forms ``L``.

The children of a one-bit at position ``p`` of block ``b`` start at::

    block_start[b+1] + (rank1(T, p) - ones_before[b] - 1) * k[b+1]**2

which collapses to ``rank1(T, p) * k**2`` when ``k`` is the same everywhere.
"""
from __future__ import annotations

import numpy as np
from numba import njit

from .bitvec import BitVector, nb_bit, nb_rank1
from .grid import KSchedule, QueryRect, WeightedPointSet, level_radix, morton_codes


def block_bits(parents: np.ndarray, children: np.ndarray, k: int) -> np.ndarray:
    """Child bits of the sorted ``parents`` prefixes given sorted ``children`` prefixes."""
    kk = k * k
    bits = np.zeros(len(parents) * kk, dtype=bool)
    if len(children):
        idx = np.searchsorted(parents, children // kk)
        bits[idx * kk + children % kk] = True
    return bits


def block_layout(ks, sizes_from_ones):
    """``block_start`` and ``ones_before`` arrays from per-block one counts.

    ``sizes_from_ones(b, start, size)`` returns the number of ones in block ``b``.
    """
    h = len(ks)
    bstart = np.zeros(h + 1, dtype=np.int64)
    obefore = np.zeros(h, dtype=np.int64)
    size = ks[0] * ks[0]
    ones = 0
    for b in range(h):
        obefore[b] = ones
        bstart[b + 1] = bstart[b] + size
        o = sizes_from_ones(b, int(bstart[b]), size)
        ones += o
        if b + 1 < h:
            size = o * ks[b + 1] * ks[b + 1]
    return bstart, obefore


@njit(cache=True, _nrt=False)
def nb_tl_bit(tw, tlen, lw, p):
    if p < tlen:
        return nb_bit(tw, p)
    return nb_bit(lw, p - tlen)


@njit(cache=True, _nrt=False)
def _push_children(st_p, st_b, st_x, st_y, sp, start, b, x0, y0, k, side,
                   x1, x2, y1, y2, tw, tlen, lw):
    # reverse Morton order so that pops come out in Morton order
    for d in range(k * k - 1, -1, -1):
        cx = x0 + (d % k) * side
        cy = y0 + (d // k) * side
        if cx > x2 or cx + side - 1 < x1 or cy > y2 or cy + side - 1 < y1:
            continue
        p = start + d
        if nb_tl_bit(tw, tlen, lw, p) == 0:
            continue
        st_p[sp] = p
        st_b[sp] = b
        st_x[sp] = cx
        st_y[sp] = cy
        sp += 1
    return sp


@njit(cache=True)
def nb_k2_range(tw, ts, tb, tlen, lw, ks, sides, bstart, obefore,
                x1, x2, y1, y2, ox, oy, emit):
    """Multi-branch range traversal; fills ``ox/oy`` when ``emit`` and returns the count."""
    h = len(ks)
    cap = 1
    for b in range(h):
        cap += ks[b] * ks[b]
    st_p = np.empty(cap, np.int64)
    st_b = np.empty(cap, np.int64)
    st_x = np.empty(cap, np.int64)
    st_y = np.empty(cap, np.int64)
    found = 0
    if h == 1:
        return _emit_cells(lw, 0, 0, 0, ks[0], x1, x2, y1, y2, ox, oy, emit, found)
    sp = _push_children(st_p, st_b, st_x, st_y, 0, 0, 0, 0, 0, ks[0], sides[1],
                        x1, x2, y1, y2, tw, tlen, lw)
    while sp > 0:
        sp -= 1
        p = st_p[sp]
        b = st_b[sp]
        k = ks[b + 1]
        start = bstart[b + 1] + (nb_rank1(tw, ts, tb, p) - obefore[b] - 1) * k * k
        if b + 1 == h - 1:
            # children are cells: report them directly, in Morton order
            found = _emit_cells(lw, start - tlen, st_x[sp], st_y[sp], k, x1, x2, y1, y2,
                                ox, oy, emit, found)
            continue
        sp = _push_children(st_p, st_b, st_x, st_y, sp, start, b + 1, st_x[sp], st_y[sp],
                            k, sides[b + 2], x1, x2, y1, y2, tw, tlen, lw)
    return found


@njit(cache=True, _nrt=False)
def _emit_cells(lw, lstart, x0, y0, k, x1, x2, y1, y2, ox, oy, emit, found):
    for d in range(k * k):
        cx = x0 + d % k
        cy = y0 + d // k
        if cx < x1 or cx > x2 or cy < y1 or cy > y2:
            continue
        if nb_bit(lw, lstart + d):
            if emit:
                ox[found] = cx
                oy[found] = cy
            found += 1
    return found


@njit(cache=True)
def nb_k2_cell(tw, ts, tb, tlen, lw, ks, sides, bstart, obefore, x, y):
    h = len(ks)
    start = 0
    for b in range(h):
        k = ks[b]
        s = sides[b + 1]
        p = start + ((y // s) % k) * k + (x // s) % k
        if nb_tl_bit(tw, tlen, lw, p) == 0:
            return False
        if b == h - 1:
            return True
        start = bstart[b + 1] + (nb_rank1(tw, ts, tb, p) - obefore[b] - 1) * ks[b + 1] * ks[b + 1]
    return False


class K2Tree:
    """Topology-only K2-tree: ``T`` (inner levels) and ``L`` (cells)."""

    def __init__(self, T: BitVector, L: BitVector, schedule: KSchedule, t: int,
                 rows: int | None = None, cols: int | None = None):
        self.T, self.L = T, L
        self.schedule = schedule
        self.n = schedule.n
        self.t = int(t)
        self.rows = self.n if rows is None else int(rows)
        self.cols = self.n if cols is None else int(cols)
        self._ks = np.asarray(schedule.ks, dtype=np.int64)
        self._sides = schedule.sides()

        def ones_in(b, start, size):
            return self._ones_between(start, start + size)

        self.block_start, self.ones_before = block_layout(self._ks, ones_in)
        if self.block_start[-1] != len(T) + len(L):
            raise ValueError("bitmap lengths do not match the schedule")
        if len(L) != self.block_start[-1] - self.block_start[-2]:
            raise ValueError("L does not hold exactly the last level")
        if L.ones != self.t:
            raise ValueError(f"L holds {L.ones} cells but t={self.t}")

    def _ones_between(self, a: int, b: int) -> int:
        """Ones in ``T:L`` positions ``[a, b)``."""
        def before(p):
            if p <= 0:
                return 0
            tl = len(self.T)
            if p <= tl:
                return self.T.rank1(p - 1)
            return self.T.ones + self.L.rank1(p - tl - 1)
        return before(b) - before(a)

    @classmethod
    def build(cls, points: WeightedPointSet, schedule: KSchedule | None = None) -> "K2Tree":
        side = max(points.rows, points.cols)
        if schedule is None:
            schedule = KSchedule.hybrid(side)
        if schedule.n < side:
            raise ValueError(f"schedule covers {schedule.n} but the grid needs {side}")
        codes = np.sort(morton_codes(points.xs, points.ys, schedule))
        blocks = level_blocks(codes, schedule)
        T = BitVector(np.concatenate(blocks[:-1]) if len(blocks) > 1 else np.zeros(0, bool))
        L = BitVector(blocks[-1])
        return cls(T, L, schedule, len(codes), points.rows, points.cols)

    @property
    def height(self) -> int:
        return len(self._ks)

    def levels(self) -> list[np.ndarray]:
        """Bits of every block as boolean arrays (T blocks then the L block)."""
        allbits = np.concatenate([self.T.to_bools(), self.L.to_bools()])
        return [allbits[self.block_start[b]:self.block_start[b + 1]] for b in range(self.height)]

    def _args(self):
        tw, ts, tb = self.T.kernel_args()
        return (tw, ts, tb, len(self.T), self.L.words, self._ks, self._sides,
                self.block_start, self.ones_before)

    def _range(self, q: QueryRect, emit: bool):
        q = QueryRect(*q).clamp(self.n)
        if q is None or self.t == 0:
            return 0, np.zeros(0, np.int64), np.zeros(0, np.int64)
        cap = min(self.t, q.area) if emit else 0
        ox = np.empty(cap, np.int64)
        oy = np.empty(cap, np.int64)
        c = nb_k2_range(*self._args(), q.x1, q.x2, q.y1, q.y2, ox, oy, emit)
        return c, ox[:c] if emit else ox, oy[:c] if emit else oy

    def report_arrays(self, q: QueryRect) -> tuple[np.ndarray, np.ndarray]:
        """Columns and rows of the points inside ``q``, in Morton order."""
        _, xs, ys = self._range(q, True)
        return xs, ys

    def report(self, q: QueryRect) -> list[tuple[int, int]]:
        xs, ys = self.report_arrays(q)
        return list(zip(xs.tolist(), ys.tolist()))

    def count_by_traversal(self, q: QueryRect) -> int:
        """Points inside ``q`` counted by descending to the leaves."""
        return int(self._range(q, False)[0])

    def check_cell(self, x: int, y: int) -> bool:
        if not (0 <= x < self.n and 0 <= y < self.n):
            raise ValueError(f"cell ({x}, {y}) outside the {self.n}x{self.n} grid")
        if self.t == 0:
            return False
        return bool(nb_k2_cell(*self._args(), int(x), int(y)))

    def size_in_bits(self) -> int:
        return self.T.size_in_bits() + self.L.size_in_bits()


def level_blocks(codes: np.ndarray, schedule: KSchedule) -> list[np.ndarray]:
    """Per-block child bits for the sorted Morton ``codes`` of the non-empty cells."""
    ks = schedule.ks
    radix = level_radix(schedule)
    blocks = []
    parents = np.zeros(1, dtype=np.int64)
    for b, k in enumerate(ks):
        children = np.unique(codes // radix[b + 1])
        blocks.append(block_bits(parents, children, k))
        parents = children
    return blocks
