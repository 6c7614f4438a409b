"""K2-treap: ranked (max/min) range queries over a weighted grid.

Every node keeps the heaviest cell of its submatrix, and that cell is removed
before the node is split further, so each point lives in exactly one node.
Three parts are stored:

* ``T``: child bits of every level, cells included, with rank support;
* ``coord``: per-level local offsets of each node's point, packed with
  ``ceil(log2(side))`` bits per component (the root stores absolute
  coordinates; the cell level stores none);
* ``values``: DACs of ``parent_weight - node_weight`` in level order, with the
  root's absolute weight first.

A node whose bit sits at position ``p`` reads its weight difference at
``values[rank1(T, p)]`` and its offset at ``coord[l][rank1(T, p) - first[l]]``.
"""
from __future__ import annotations

import heapq

import numpy as np
from numba import njit

from .bitvec import BitVector, get_bits_many, nb_bit, nb_get_bits, nb_rank1
from .dac import DEFAULT_CHUNK, DacSequence, nb_dac_access
from .grid import KSchedule, QueryRect, WeightedPointSet, level_radix, morton_codes, zorder_codes
from .k2tree import block_bits, block_layout


def pack_levels(arrays, widths) -> tuple[np.ndarray, np.ndarray]:
    """Pack several integer arrays, each with its own width, into one word array."""
    parts, offsets, pos = [], [], 0
    for vals, w in zip(arrays, widths):
        offsets.append(pos)
        vals = np.asarray(vals, dtype=np.int64)
        if w and len(vals):
            parts.append(((vals[:, None] >> np.arange(w)) & 1).astype(bool).ravel())
            pos += len(vals) * w
    bits = np.concatenate(parts) if parts else np.zeros(0, bool)
    raw = np.packbits(bits, bitorder="little")
    raw = np.concatenate([raw, np.zeros((-len(raw)) % 8, np.uint8)])
    return raw.view("<u8").astype(np.uint64), np.asarray(offsets, dtype=np.int64)


@njit(cache=True, _nrt=False)
def _decode(tw, ts, tb, ks, sides, obefore, cwords, coff, cwid, dac, first, h,
            p, b, cx, cy, pw):
    """Point and weight of the node whose bit is ``p`` in block ``b``."""
    return _decode_rank(cwords, coff, cwid, dac, first, h, nb_rank1(tw, ts, tb, p), b, cx, cy, pw)


@njit(cache=True, _nrt=False)
def _decode_rank(cwords, coff, cwid, dac, first, h, r, b, cx, cy, pw):
    # same as _decode when the node rank is already known
    w = pw - nb_dac_access(dac[0], dac[1], dac[2], dac[3], dac[4], dac[5], r)
    lvl = b + 1
    if lvl < h:
        wid = cwid[lvl]
        j = r - first[lvl]
        px = cx + nb_get_bits(cwords, coff[lvl] + 2 * j * wid, wid)
        py = cy + nb_get_bits(cwords, coff[lvl] + (2 * j + 1) * wid, wid)
    else:
        px = cx
        py = cy
    return r, px, py, w


@njit(cache=True, _nrt=False)
def _child_start(bstart, obefore, ks, b, r):
    # children of a node with rank r whose bit is in block b
    return bstart[b + 1] + (r - obefore[b] - 1) * ks[b + 1] * ks[b + 1]


@njit(cache=True)
def nb_treap_cell(tw, ts, tb, ks, sides, bstart, obefore, cwords, coff, cwid, dac, first,
                  rx, ry, rw, x, y):
    if rx == x and ry == y:
        return rw
    h = len(ks)
    start = 0
    cx = 0
    cy = 0
    pw = rw
    for b in range(h):
        k = ks[b]
        s = sides[b + 1]
        dy = (y - cy) // s
        dx = (x - cx) // s
        p = start + dy * k + dx
        if nb_bit(tw, p) == 0:
            return -1
        cx += dx * s
        cy += dy * s
        r, px, py, w = _decode(tw, ts, tb, ks, sides, obefore, cwords, coff, cwid, dac, first,
                               h, p, b, cx, cy, pw)
        if px == x and py == y:
            return w
        if b == h - 1:
            return -1
        start = _child_start(bstart, obefore, ks, b, r)
        pw = w
    return -1


@njit(cache=True)
def nb_treap_topk(tw, ts, tb, ks, sides, bstart, obefore, cwords, coff, cwid, dac, first,
                  rx, ry, rw, x1, x2, y1, y2, kk, ox, oy, ow):
    """Best-first search; returns (results found, queue pops)."""
    h = len(ks)
    seq = 0
    # (-weight, insertion order, node rank, block, origin x, origin y, px, py)
    heap = [(-rw, seq, 0, -1, 0, 0, rx, ry)]
    found = 0
    pops = 0
    while len(heap) > 0 and found < kk:
        negw, _, r, b, cx, cy, px, py = heapq.heappop(heap)
        pops += 1
        if x1 <= px <= x2 and y1 <= py <= y2:
            ox[found] = px
            oy[found] = py
            ow[found] = -negw
            found += 1
            if found == kk:
                break
        if b == h - 1:
            continue
        start = 0 if b < 0 else _child_start(bstart, obefore, ks, b, r)
        k = ks[b + 1]
        side = sides[b + 2]
        for d in range(k * k):
            ccx = cx + (d % k) * side
            ccy = cy + (d // k) * side
            if ccx > x2 or ccx + side - 1 < x1 or ccy > y2 or ccy + side - 1 < y1:
                continue
            q = start + d
            if nb_bit(tw, q) == 0:
                continue
            qr, qx, qy, w = _decode(tw, ts, tb, ks, sides, obefore, cwords, coff, cwid, dac,
                                    first, h, q, b + 1, ccx, ccy, -negw)
            seq += 1
            heapq.heappush(heap, (-w, seq, qr, b + 1, ccx, ccy, qx, qy))
    return found, pops


@njit(cache=True)
def nb_treap_range(tw, ts, tb, ks, sides, bstart, obefore, cwords, coff, cwid, dac, first,
                   rx, ry, rw, x1, x2, y1, y2, wlo, whi, ox, oy, ow):
    """Depth-first report of points in the rectangle with weight in ``[wlo, whi]``.

    Subtrees whose maximum is below ``wlo`` are skipped whole. Output order is
    unspecified; callers sort.
    """
    h = len(ks)
    cap = 1
    for b in range(h):
        cap += ks[b] * ks[b]
    st = np.empty((cap, 7), np.int64)
    found = 0
    if rw < wlo:
        return 0
    st[0, 0] = 0
    st[0, 1] = -1
    st[0, 2] = 0
    st[0, 3] = 0
    st[0, 4] = rx
    st[0, 5] = ry
    st[0, 6] = rw
    sp = 1
    while sp > 0:
        sp -= 1
        r = st[sp, 0]
        b = st[sp, 1]
        cx = st[sp, 2]
        cy = st[sp, 3]
        px = st[sp, 4]
        py = st[sp, 5]
        pw = st[sp, 6]
        if x1 <= px <= x2 and y1 <= py <= y2 and pw <= whi:
            ox[found] = px
            oy[found] = py
            ow[found] = pw
            found += 1
        if b == h - 1:
            continue
        start = 0 if b < 0 else _child_start(bstart, obefore, ks, b, r)
        k = ks[b + 1]
        side = sides[b + 2]
        # siblings have consecutive ranks: one rank per block, then count up
        r = nb_rank1(tw, ts, tb, start - 1) if start > 0 else 0
        for d in range(k * k):
            if nb_bit(tw, start + d) == 0:
                continue
            r += 1
            ccx = cx + (d % k) * side
            ccy = cy + (d // k) * side
            if ccx > x2 or ccx + side - 1 < x1 or ccy > y2 or ccy + side - 1 < y1:
                continue
            _, qx, qy, w = _decode_rank(cwords, coff, cwid, dac, first, h, r, b + 1, ccx, ccy, pw)
            if w < wlo:
                continue
            st[sp, 0] = r
            st[sp, 1] = b + 1
            st[sp, 2] = ccx
            st[sp, 3] = ccy
            st[sp, 4] = qx
            st[sp, 5] = qy
            st[sp, 6] = w
            sp += 1
    return found


class K2Treap:
    """Weighted grid index answering cell access, top-k, range and interval queries.

    With ``order="min"`` weights are stored reflected (``d - 1 - w``) so the
    same machinery returns the lightest points first; all inputs and outputs
    stay in the original weight scale.
    """

    def __init__(self, T: BitVector, coord_words: np.ndarray, values: DacSequence,
                 schedule: KSchedule, t: int, d: int, root: tuple[int, int, int] | None,
                 rows: int | None = None, cols: int | None = None, order: str = "max"):
        if order not in ("max", "min"):
            raise ValueError("order must be 'max' or 'min'")
        self.T = T
        self.values = values
        self.schedule = schedule
        self.n = schedule.n
        self.t, self.d = int(t), int(d)
        self.rows = self.n if rows is None else int(rows)
        self.cols = self.n if cols is None else int(cols)
        self.order = order
        self._ks = np.asarray(schedule.ks, dtype=np.int64)
        self._sides = schedule.sides()
        h = len(self._ks)

        def before(p):
            return T.rank1(p - 1) if p else 0

        def ones_in(b, start, size):
            return before(start + size) - before(start)

        self.block_start, self.ones_before = block_layout(self._ks, ones_in)
        if self.block_start[-1] != len(T):
            raise ValueError("bitmap length does not match the schedule")
        if T.ones + (1 if self.t else 0) != self.t or len(values) != self.t:
            raise ValueError("node count does not match the number of points")
        # first[l]: where level l starts in values (level 0 is the root)
        self.first = np.concatenate([[0], 1 + self.ones_before]).astype(np.int64)
        self.coord_widths = np.asarray([int(s - 1).bit_length() for s in self._sides[:h]], np.int64)
        counts = np.diff(np.concatenate([self.first, [max(self.t, 1)]]))
        counts[0] = 1 if self.t else 0
        offs, pos = [], 0
        for lvl in range(h):
            offs.append(pos)
            pos += 2 * int(counts[lvl]) * int(self.coord_widths[lvl])
        self.coord_offsets = np.asarray(offs, dtype=np.int64)
        if len(coord_words) != (pos + 63) // 64:
            raise ValueError("coordinate payload has the wrong size")
        self.coord_words = np.ascontiguousarray(coord_words, dtype=np.uint64)
        self.root = root if self.t else None

    # construction -----------------------------------------------------------

    @classmethod
    def build(cls, points: WeightedPointSet, schedule: KSchedule | None = None,
              order: str = "max", chunk: int = DEFAULT_CHUNK) -> "K2Treap":
        side = max(points.rows, points.cols)
        if schedule is None:
            schedule = KSchedule.uniform(2, side)
        if schedule.n < side:
            raise ValueError(f"schedule covers {schedule.n} but the grid needs {side}")
        ws = points.ws if order == "max" else (points.d - 1) - points.ws
        codes = morton_codes(points.xs, points.ys, schedule)
        perm = np.argsort(codes, kind="stable")
        codes, xs, ys, ws = codes[perm], points.xs[perm], points.ys[perm], ws[perm]
        ks = schedule.ks
        h = len(ks)
        sides = schedule.sides()
        radix = level_radix(schedule)
        t = len(codes)

        blocks, diffs, coords = [], [], []
        widths = [int(s - 1).bit_length() for s in sides[:h]]
        root = None
        remaining = np.ones(t, dtype=bool)
        parents = np.zeros(1, dtype=np.int64)
        parent_w = np.zeros(1, dtype=np.int64)
        if t:
            # argmax returns the first maximum, i.e. the earliest in Morton order
            i = int(np.argmax(ws))
            root = (int(xs[i]), int(ys[i]), int(ws[i]))
            remaining[i] = False
            diffs.append(ws[i:i + 1])
            coords.append(np.array([xs[i], ys[i]]))
            parent_w = ws[i:i + 1]
        for lvl in range(1, h + 1):
            k = ks[lvl - 1]
            idx = np.flatnonzero(remaining)
            pref = codes[idx] // radix[lvl]
            chosen = np.zeros(0, np.int64)
            uniq = np.zeros(0, np.int64)
            if len(idx):
                head = np.concatenate([[True], pref[1:] != pref[:-1]])
                starts = np.flatnonzero(head)
                group = np.cumsum(head) - 1
                gw = ws[idx]
                gmax = np.maximum.reduceat(gw, starts)
                cand = np.where(gw == gmax[group], np.arange(len(idx)), len(idx))
                chosen = idx[np.minimum.reduceat(cand, starts)]
                uniq = pref[starts]
            blocks.append(block_bits(parents, uniq, k))
            node_w = ws[chosen]
            diffs.append(parent_w[np.searchsorted(parents, uniq // (k * k))] - node_w)
            if lvl < h:
                s = sides[lvl]
                coords.append(np.stack([xs[chosen] % s, ys[chosen] % s], axis=1).ravel())
            remaining[chosen] = False
            parents, parent_w = uniq, node_w

        T = BitVector(np.concatenate(blocks))
        values = DacSequence(np.concatenate(diffs) if diffs else [], b=chunk)
        coord_words, _ = pack_levels(coords, widths)
        return cls(T, coord_words, values, schedule, t, points.d, root,
                   points.rows, points.cols, order)

    # helpers ----------------------------------------------------------------

    @property
    def height(self) -> int:
        return len(self._ks)

    def _args(self):
        tw, ts, tb = self.T.kernel_args()
        return (tw, ts, tb, self._ks, self._sides, self.block_start, self.ones_before,
                self.coord_words, self.coord_offsets, self.coord_widths,
                self.values.kernel_args(), self.first, *self.root)

    def _out(self, w: np.ndarray) -> np.ndarray:
        return w if self.order == "max" else (self.d - 1) - w

    def _morton_sorted(self, xs, ys, ws):
        order = np.argsort(zorder_codes(xs, ys), kind="stable")
        return list(zip(xs[order].tolist(), ys[order].tolist(), self._out(ws[order]).tolist()))

    # queries ----------------------------------------------------------------

    def access_cell(self, x: int, y: int) -> int | None:
        """Weight stored at cell ``(x, y)``, or ``None`` when it is empty."""
        if not (0 <= x < self.n and 0 <= y < self.n):
            raise ValueError(f"cell ({x}, {y}) outside the {self.n}x{self.n} grid")
        if not self.t:
            return None
        w = int(nb_treap_cell(*self._args(), int(x), int(y)))
        return None if w < 0 else int(self._out(np.int64(w)))

    def top_k(self, q: QueryRect, k: int, return_pops: bool = False):
        """The ``k`` heaviest points in ``q`` (lightest for a min treap), best first."""
        if k < 1:
            raise ValueError("k must be >= 1")
        q = QueryRect(*q).clamp(self.n)
        if q is None or not self.t:
            return ([], 0) if return_pops else []
        ox = np.empty(k, np.int64)
        oy = np.empty(k, np.int64)
        ow = np.empty(k, np.int64)
        found, pops = nb_treap_topk(*self._args(), q.x1, q.x2, q.y1, q.y2, int(k), ox, oy, ow)
        res = list(zip(ox[:found].tolist(), oy[:found].tolist(), self._out(ow[:found]).tolist()))
        return (res, int(pops)) if return_pops else res

    def max(self, q: QueryRect):
        """Best point in ``q`` as ``(x, y, w)``; ``None`` if ``q`` is empty."""
        res = self.top_k(q, 1)
        return res[0] if res else None

    def _range(self, q, lo, hi):
        q = QueryRect(*q).clamp(self.n)
        if q is None or not self.t:
            z = np.zeros(0, np.int64)
            return z, z, z
        cap = min(self.t, q.area)
        ox, oy, ow = (np.empty(cap, np.int64) for _ in range(3))
        c = nb_treap_range(*self._args(), q.x1, q.x2, q.y1, q.y2, lo, hi, ox, oy, ow)
        return ox[:c], oy[:c], ow[:c]

    def range_report_arrays(self, q: QueryRect):
        """Unordered ``(xs, ys, ws)`` arrays of every point in ``q``."""
        xs, ys, ws = self._range(q, np.iinfo(np.int64).min, np.iinfo(np.int64).max)
        return xs, ys, self._out(ws)

    def range_report(self, q: QueryRect) -> list[tuple[int, int, int]]:
        """Every point in ``q`` as ``(x, y, w)``, in Z-order."""
        xs, ys, ws = self._range(q, np.iinfo(np.int64).min, np.iinfo(np.int64).max)
        return self._morton_sorted(xs, ys, ws)

    def interval_arrays(self, q: QueryRect, w_lo: int, w_hi: int):
        if w_lo > w_hi:
            raise ValueError("w_lo must not exceed w_hi")
        if self.order == "min":
            w_lo, w_hi = self.d - 1 - w_hi, self.d - 1 - w_lo
        xs, ys, ws = self._range(q, int(w_lo), int(w_hi))
        return xs, ys, self._out(ws)

    def interval(self, q: QueryRect, w_lo: int, w_hi: int) -> list[tuple[int, int, int]]:
        """Points in ``q`` with weight in ``[w_lo, w_hi]``, in Z-order."""
        xs, ys, ws = self.interval_arrays(q, w_lo, w_hi)
        order = np.argsort(zorder_codes(xs, ys), kind="stable")
        return list(zip(xs[order].tolist(), ys[order].tolist(), ws[order].tolist()))

    # inspection -------------------------------------------------------------

    def nodes(self) -> dict[str, np.ndarray]:
        """Decode every node level by level, without the query kernels.

        Returns arrays ``level, x, y, w, parent, ox, oy`` indexed by node rank
        (rank 0 is the root); ``ox, oy`` give the origin of the node's submatrix.
        Weights are in stored (possibly reflected) scale.
        """
        h = self.height
        if not self.t:
            z = np.zeros(0, np.int64)
            return dict(level=z, x=z, y=z, w=z, parent=z, ox=z, oy=z)
        diffs = self.values.to_array()
        bits = self.T.to_bools()
        rx, ry, rw = self.root
        level, xs, ys, ws, parent, ox, oy = [[0]], [[rx]], [[ry]], [[rw]], [[-1]], [[0]], [[0]]
        par_rank = np.array([0])
        par_ox = np.array([0])
        par_oy = np.array([0])
        par_w = np.array([rw])
        for b in range(h):
            k = int(self._ks[b])
            s = int(self._sides[b + 1])
            blk = bits[self.block_start[b]:self.block_start[b + 1]]
            pos = np.flatnonzero(blk)
            owner = pos // (k * k)
            digit = pos % (k * k)
            ranks = 1 + self.ones_before[b] + np.arange(len(pos))
            cx = par_ox[owner] + (digit % k) * s
            cy = par_oy[owner] + (digit // k) * s
            w = par_w[owner] - diffs[ranks]
            if b + 1 < h:
                wid = int(self.coord_widths[b + 1])
                j = ranks - self.first[b + 1]
                base = self.coord_offsets[b + 1]
                lx = get_bits_many(self.coord_words, base + 2 * j * wid, wid)
                ly = get_bits_many(self.coord_words, base + (2 * j + 1) * wid, wid)
                px, py = cx + lx, cy + ly
            else:
                px, py = cx, cy
            level.append(np.full(len(pos), b + 1))
            xs.append(px)
            ys.append(py)
            ws.append(w)
            parent.append(par_rank[owner])
            ox.append(cx)
            oy.append(cy)
            par_rank, par_ox, par_oy, par_w = ranks, cx, cy, w
        cat = lambda a: np.concatenate([np.asarray(v, dtype=np.int64) for v in a])
        return dict(level=cat(level), x=cat(xs), y=cat(ys), w=cat(ws), parent=cat(parent),
                    ox=cat(ox), oy=cat(oy))

    def size_in_bits(self) -> int:
        return (self.T.size_in_bits() + self.values.size_in_bits()
                + 64 * len(self.coord_words) + 64 * len(self.first))

