"""K2-tree augmented with per-node counts (or weight sums) for fast range aggregation.

Nodes of the top ``aug_levels`` levels (root = level 0) carry the number of
points, or the sum of weights, in their submatrix. The root value is stored
as is; every other value is stored as its difference from the parent's
uniform share, ``value - parent_value // children(parent)``, folded to a
non-negative integer with zigzag and kept in DACs in level order. The value of
the node whose bit is at ``p`` lives at ``counts[rank1(T, p)]``.

Cells never carry a count: a set bit already means one point. In sum mode the
cell weights are kept separately, in ``L`` order, so queries can finish below
the augmented levels.
"""
from __future__ import annotations

import numpy as np
from numba import njit

from .bitvec import BitVector, nb_get_bits, nb_popcount, nb_rank1
from .dac import DEFAULT_CHUNK, DacSequence, nb_dac_access
from .grid import KSchedule, QueryRect, WeightedPointSet, level_radix, morton_codes
from .k2tree import K2Tree, level_blocks

COUNT, SUM = "count", "sum"
# one-bit chunks: a count diff of zero (the common case) costs two bits
DEFAULT_COUNT_CHUNK = 1


def zigzag(v):
    """Fold signed integers onto non-negative ones: ``-i -> 2i-1``, ``j -> 2j``."""
    if isinstance(v, np.ndarray):
        v = v.astype(np.int64)
        return (v << 1) ^ (v >> 63)
    return 2 * v if v >= 0 else -2 * v - 1


def unzigzag(u):
    if isinstance(u, np.ndarray):
        u = u.astype(np.int64)
        return (u >> 1) ^ -(u & 1)
    return u >> 1 if u % 2 == 0 else -((u + 1) >> 1)


@njit(cache=True, _nrt=False)
def _unzz(u):
    return (u >> 1) ^ -(u & 1)


@njit(cache=True, _nrt=False)
def _cells(lw, ls, lb, lstart, x0, y0, k, x1, x2, y1, y2, leaf, use_leaf):
    """Count (or weigh) the set cells of one leaf block that fall inside the query."""
    total = 0
    li = 0
    if use_leaf:
        li = nb_rank1(lw, ls, lb, lstart - 1) if lstart > 0 else 0
    kk = k * k
    for base in range(0, kk, 64):
        bits = nb_get_bits(lw, lstart + base, min(64, kk - base))
        while bits:
            low = bits & -bits
            bits ^= low
            d = base + nb_popcount(np.uint64(low - 1))
            cx = x0 + d % k
            cy = y0 + d // k
            if x1 <= cx <= x2 and y1 <= cy <= y2:
                if use_leaf:
                    total += nb_dac_access(leaf[0], leaf[1], leaf[2], leaf[3], leaf[4], leaf[5], li)
                else:
                    total += 1
            li += 1
    return total


@njit(cache=True)
def nb_aggregate(tw, ts, tb, tlen, lw, ls, lb, ks, sides, bstart, obefore,
                 cdac, aug, leaf, use_leaf, x1, x2, y1, y2):
    h = len(ks)
    root = nb_dac_access(cdac[0], cdac[1], cdac[2], cdac[3], cdac[4], cdac[5], 0)
    n = sides[0]
    if x1 <= 0 and y1 <= 0 and x2 >= n - 1 and y2 >= n - 1:
        return root
    if h == 1:
        return _cells(lw, ls, lb, 0, 0, 0, ks[0], x1, x2, y1, y2, leaf, use_leaf)
    cap = 1
    for b in range(h):
        cap += ks[b] * ks[b]
    # stack rows: node rank, block of its bit, origin x, origin y, value (-1 if not stored)
    st = np.empty((cap, 5), np.int64)
    sp = 0
    total = 0
    # expand the children block at ``start``; the parent carries value ``pc``
    k = ks[0]
    kk = k * k
    start = 0
    pc = root
    cb = 0
    ox = 0
    oy = 0
    while True:
        side = sides[cb + 1]
        counted = cb + 1 < aug
        # siblings have consecutive ranks: one rank per block, then count up
        r = nb_rank1(tw, ts, tb, start - 1) if start > 0 else 0
        share = 0
        if counted:
            nch = 0
            for base in range(0, kk, 64):
                nch += nb_popcount(np.uint64(nb_get_bits(tw, start + base, min(64, kk - base))))
            share = pc // nch
        for base in range(0, kk, 64):
            bits = nb_get_bits(tw, start + base, min(64, kk - base))
            while bits:
                low = bits & -bits
                bits ^= low
                d = base + nb_popcount(np.uint64(low - 1))
                r += 1
                cx = ox + (d % k) * side
                cy = oy + (d // k) * side
                if cx > x2 or cx + side - 1 < x1 or cy > y2 or cy + side - 1 < y1:
                    continue
                c = -1
                if counted:
                    c = _unzz(nb_dac_access(cdac[0], cdac[1], cdac[2], cdac[3], cdac[4], cdac[5], r)) + share
                st[sp, 0] = r
                st[sp, 1] = cb
                st[sp, 2] = cx
                st[sp, 3] = cy
                st[sp, 4] = c
                sp += 1
        # pop until a node needs expanding
        expanded = False
        while sp > 0:
            sp -= 1
            r = st[sp, 0]
            b = st[sp, 1]
            cx = st[sp, 2]
            cy = st[sp, 3]
            c = st[sp, 4]
            side = sides[b + 1]
            if c >= 0 and x1 <= cx and cx + side - 1 <= x2 and y1 <= cy and cy + side - 1 <= y2:
                total += c
                continue
            k = ks[b + 1]
            kk = k * k
            start = bstart[b + 1] + (r - obefore[b] - 1) * kk
            if b + 1 == h - 1:
                total += _cells(lw, ls, lb, start - tlen, cx, cy, k, x1, x2, y1, y2, leaf, use_leaf)
                continue
            pc = c
            cb = b + 1
            ox = cx
            oy = cy
            expanded = True
            break
        if not expanded:
            return total


class CountingK2Tree:
    """Range counting (``mode="count"``) or range sums (``mode="sum"``) over a K2-tree."""

    def __init__(self, base: K2Tree, counts: DacSequence, aug_levels: int, mode: str = COUNT,
                 leaf_weights: DacSequence | None = None, d: int = 0):
        if mode not in (COUNT, SUM):
            raise ValueError(f"unknown mode {mode!r}")
        if mode == SUM and (leaf_weights is None or len(leaf_weights) != base.t):
            raise ValueError("sum mode needs one leaf weight per point")
        self.base = base
        self.counts = counts
        self.aug_levels = max(1, min(int(aug_levels), base.height))
        self.mode = mode
        self.leaf_weights = leaf_weights
        self.d = int(d)
        expect = 1 + int(base.ones_before[self.aug_levels - 1]) if self.aug_levels > 1 else 1
        if len(counts) != expect:
            raise ValueError(f"expected {expect} stored values, got {len(counts)}")

    @classmethod
    def build(cls, points: WeightedPointSet, schedule: KSchedule | None = None,
              aug_levels: int | None = None, mode: str = COUNT,
              chunk: int = DEFAULT_COUNT_CHUNK) -> "CountingK2Tree":
        """Build over ``points``; ``aug_levels=None`` augments every level above the cells."""
        if mode not in (COUNT, SUM):
            raise ValueError(f"unknown mode {mode!r}")
        side = max(points.rows, points.cols)
        if schedule is None:
            schedule = KSchedule.hybrid(side)
        if schedule.n < side:
            raise ValueError(f"schedule covers {schedule.n} but the grid needs {side}")
        if aug_levels is None:
            aug_levels = schedule.height
        if aug_levels < 1:
            raise ValueError("aug_levels must be >= 1")
        aug = min(int(aug_levels), schedule.height)

        codes = morton_codes(points.xs, points.ys, schedule)
        perm = np.argsort(codes, kind="stable")
        codes = codes[perm]
        ws = points.ws[perm] if mode == SUM else np.ones(len(codes), np.int64)
        blocks = level_blocks(codes, schedule)
        T = BitVector(np.concatenate(blocks[:-1]) if len(blocks) > 1 else np.zeros(0, bool))
        L = BitVector(blocks[-1])
        base = K2Tree(T, L, schedule, len(codes), points.rows, points.cols)

        ks = schedule.ks
        radix = level_radix(schedule)
        stored = [np.array([ws.sum()], dtype=np.int64)]
        parents = np.zeros(1, dtype=np.int64)
        parent_val = stored[0]
        for lvl in range(1, aug):
            kk = ks[lvl - 1] ** 2
            pref = codes // radix[lvl]
            head = np.concatenate([[True], pref[1:] != pref[:-1]]) if len(pref) else np.zeros(0, bool)
            starts = np.flatnonzero(head)
            uniq = pref[starts]
            vals = np.add.reduceat(ws, starts) if len(starts) else np.zeros(0, np.int64)
            pidx = np.searchsorted(parents, uniq // kk)
            nch = np.bincount(pidx, minlength=len(parents))
            share = parent_val[pidx] // nch[pidx]
            stored.append(zigzag(vals - share))
            parents, parent_val = uniq, vals
        counts = DacSequence(np.concatenate(stored), b=chunk)
        leaf = DacSequence(ws, b=DEFAULT_CHUNK) if mode == SUM else None
        return cls(base, counts, aug, mode, leaf, points.d)

    @property
    def t(self) -> int:
        return self.base.t

    @property
    def n(self) -> int:
        return self.base.n

    def _aggregate(self, q: QueryRect) -> int:
        q = QueryRect(*q).clamp(self.n)
        if q is None or self.t == 0:
            return 0
        b = self.base
        tw, ts, tb = b.T.kernel_args()
        lw, ls, lb = b.L.kernel_args()
        leaf = self.leaf_weights if self.leaf_weights is not None else self.counts
        return int(nb_aggregate(tw, ts, tb, len(b.T), lw, ls, lb, b._ks, b._sides,
                                b.block_start, b.ones_before, self.counts.kernel_args(),
                                self.aug_levels, leaf.kernel_args(), self.mode == SUM,
                                q.x1, q.x2, q.y1, q.y2))

    def count(self, q: QueryRect) -> int:
        """Number of points in ``q``."""
        if self.mode != COUNT:
            raise TypeError("count() needs a tree built in count mode")
        return self._aggregate(q)

    def sum(self, q: QueryRect) -> int:
        """Sum of the weights of the points in ``q``."""
        if self.mode != SUM:
            raise TypeError("sum() needs a tree built in sum mode")
        return self._aggregate(q)

    def report(self, q: QueryRect) -> list[tuple[int, int]]:
        return self.base.report(q)

    # inspection -------------------------------------------------------------

    def decoded_values(self) -> list[np.ndarray]:
        """Absolute value of every augmented node, one array per level, in level order."""
        b = self.base
        if self.t == 0:
            return [np.zeros(1, np.int64)]
        stored = self.counts.to_array()
        blocks = b.levels()
        out = [stored[:1]]
        for lvl in range(1, self.aug_levels):
            k = b.schedule.ks[lvl - 1]
            pos = np.flatnonzero(blocks[lvl - 1])
            owner = pos // (k * k)
            nch = np.bincount(owner, minlength=len(out[-1]))
            ranks = 1 + b.ones_before[lvl - 1] + np.arange(len(pos))
            out.append(unzigzag(stored[ranks]) + out[-1][owner] // nch[owner])
        return out

    def node_value(self, pos: int) -> int:
        """Decode the value of the node whose bit is ``T[pos]``, walking down from the root.

        Ancestors are located with ``select1``; ``pos`` must lie on an augmented level.
        """
        b = self.base
        path = []
        while True:
            blk = int(np.searchsorted(b.block_start, pos, side="right")) - 1
            if blk + 1 >= self.aug_levels:
                raise ValueError(f"bit {pos} is below the augmented levels")
            if not b.T[pos]:
                raise ValueError(f"bit {pos} is an empty submatrix")
            path.append((pos, blk))
            if blk == 0:
                break
            kk = b.schedule.ks[blk] ** 2
            j = (pos - int(b.block_start[blk])) // kk
            pos = b.T.select1(int(b.ones_before[blk - 1]) + j + 1)
        val = self.counts[0]
        for pos, blk in reversed(path):
            kk = b.schedule.ks[blk] ** 2
            start = int(b.block_start[blk]) + (pos - int(b.block_start[blk])) // kk * kk
            nch = b.T.rank1(start + kk - 1) - (b.T.rank1(start - 1) if start else 0)
            val = unzigzag(self.counts[b.T.rank1(pos)]) + val // nch
        return int(val)

    def size_in_bits(self) -> int:
        extra = self.leaf_weights.size_in_bits() if self.leaf_weights is not None else 0
        return self.base.size_in_bits() + self.counts.size_in_bits() + extra

    def overhead_bits(self) -> int:
        """Bits spent on top of the plain K2-tree."""
        return self.size_in_bits() - self.base.size_in_bits()
