"""Direct Access Codes: variable-length integers with random access.

Each value is cut into ``b``-bit chunks, least significant first. Level ``l``
holds the ``l``-th chunk of every value that needs more than ``l * b`` bits,
plus one continuation bit telling whether the value goes on.

All levels are kept in one packed chunk array and one continuation bitmap,
level after level. With ``n`` values, the chunk following global slot ``g``
sits at ``n + rank1(cont, g) - 1``, so a lookup never needs per-level offsets.
"""
from __future__ import annotations

import numpy as np
from numba import njit

from .bitvec import BitVector, IntVector, nb_bit, nb_get_bits, nb_rank1

DEFAULT_CHUNK = 4


@njit(cache=True, _nrt=False)
def nb_dac_access(chunks, b, cwords, csup, cblk, n, i):
    v = np.int64(0)
    shift = 0
    g = i
    while True:
        v |= nb_get_bits(chunks, g * b, b) << shift
        if nb_bit(cwords, g) == 0:
            return v
        g = n + nb_rank1(cwords, csup, cblk, g) - 1
        shift += b


@njit(cache=True)
def _access_many(chunks, b, cwords, csup, cblk, n, idx, out):
    for t in range(len(idx)):
        out[t] = nb_dac_access(chunks, b, cwords, csup, cblk, n, idx[t])


class DacSequence:
    """Immutable sequence of non-negative integers stored as DACs."""

    __slots__ = ("chunks", "cont", "b", "n", "level_sizes")

    def __init__(self, values=(), b: int = DEFAULT_CHUNK):
        if b < 1:
            raise ValueError("chunk width must be >= 1")
        values = np.asarray(values, dtype=np.int64).ravel()
        if len(values) and values.min() < 0:
            raise ValueError("DACs store non-negative integers only")
        self.b = int(b)
        self.n = len(values)
        mask = (1 << b) - 1
        chunk_parts, cont_parts, sizes = [], [], []
        rest = values
        while len(rest):
            chunk_parts.append(rest & mask)
            rest = rest >> b
            more = rest > 0
            cont_parts.append(more)
            sizes.append(len(more))
            rest = rest[more]
        if not chunk_parts:
            chunk_parts, cont_parts = [np.zeros(0, np.int64)], [np.zeros(0, bool)]
        self.chunks = IntVector(np.concatenate(chunk_parts), width=self.b)
        self.cont = BitVector(np.concatenate(cont_parts))
        self.level_sizes = tuple(sizes)

    @classmethod
    def from_parts(cls, chunks: IntVector, cont: BitVector, n: int) -> "DacSequence":
        if len(chunks) != len(cont):
            raise ValueError("chunk and continuation lengths differ")
        d = cls.__new__(cls)
        d.chunks, d.cont, d.b, d.n = chunks, cont, chunks.width, int(n)
        sizes, total, size = [], 0, d.n
        bits = cont.to_bools()
        while size:
            sizes.append(size)
            nxt = int(bits[total:total + size].sum())
            total += size
            size = nxt
        if total != len(chunks):
            raise ValueError("continuation bits inconsistent with length")
        d.level_sizes = tuple(sizes)
        return d

    def __len__(self) -> int:
        return self.n

    def __getitem__(self, i: int) -> int:
        i = int(i)
        if not 0 <= i < self.n:
            raise IndexError(f"index {i} out of range for length {self.n}")
        return int(nb_dac_access(*self.kernel_args(), i))

    def access(self, i: int) -> int:
        return self[i]

    def get_many(self, idx) -> np.ndarray:
        idx = np.ascontiguousarray(idx, dtype=np.int64)
        if len(idx) and (idx.min() < 0 or idx.max() >= self.n):
            raise IndexError("index out of range")
        out = np.empty(len(idx), dtype=np.int64)
        _access_many(*self.kernel_args(), idx, out)
        return out

    def to_array(self) -> np.ndarray:
        return self.get_many(np.arange(self.n))

    @property
    def levels(self) -> int:
        return len(self.level_sizes)

    def size_in_bits(self) -> int:
        return self.chunks.size_in_bits() + self.cont.size_in_bits()

    def kernel_args(self):
        w, s, k = self.cont.kernel_args()
        return self.chunks.words, self.b, w, s, k, self.n
