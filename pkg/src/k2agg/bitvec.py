"""Plain bitmaps with rank/select and fixed-width packed integer arrays.

Bits are packed LSB-first into little-endian 64-bit words: bit ``i`` lives in
word ``i // 64`` at position ``i % 64``. Rank uses a two-level directory
(absolute counts every 2**16 bits, 16-bit relative counts every 512 bits),
about 3.2% on top of the raw bits. Select binary-searches that directory.

The ``nb_*`` functions are numba kernels shared by the tree modules; they take
the raw arrays so that traversal loops can run compiled.
"""
from __future__ import annotations

import numpy as np
from numba import njit

SUPER_BITS = 1 << 16
BLOCK_BITS = 512
_WORDS_PER_BLOCK = BLOCK_BITS // 64
_BLOCKS_PER_SUPER = SUPER_BITS // BLOCK_BITS

_M1 = np.uint64(0x5555555555555555)
_M2 = np.uint64(0x3333333333333333)
_M4 = np.uint64(0x0F0F0F0F0F0F0F0F)
_H01 = np.uint64(0x0101010101010101)
_ONE = np.uint64(1)
_ALL = np.uint64(0xFFFFFFFFFFFFFFFF)


@njit(cache=True, _nrt=False)
def nb_popcount(x):
    x = x - ((x >> np.uint64(1)) & _M1)
    x = (x & _M2) + ((x >> np.uint64(2)) & _M2)
    x = (x + (x >> np.uint64(4))) & _M4
    return np.int64((x * _H01) >> np.uint64(56))


@njit(cache=True, _nrt=False)
def nb_bit(words, i):
    return np.int64((words[i >> 6] >> np.uint64(i & 63)) & _ONE)


@njit(cache=True, _nrt=False)
def nb_rank1(words, sup, blk, i):
    """Ones in positions ``0..i`` inclusive."""
    j = i + 1
    r = np.int64(sup[j >> 16]) + np.int64(blk[j >> 9])
    w = (j >> 9) * _WORDS_PER_BLOCK
    last = j >> 6
    while w < last:
        r += nb_popcount(words[w])
        w += 1
    off = j & 63
    if off:
        r += nb_popcount(words[last] & ((_ONE << np.uint64(off)) - _ONE))
    return r


@njit(cache=True, _nrt=False)
def nb_select1(words, sup, blk, nbits, j):
    """Position of the ``j``-th one (1-based); -1 if there is none."""
    if j < 1:
        return -1
    nblocks = len(blk)
    lo, hi = 0, nblocks - 1
    # last block whose preceding count is < j
    while lo < hi:
        mid = (lo + hi + 1) >> 1
        if np.int64(sup[mid >> 7]) + np.int64(blk[mid]) < j:
            lo = mid
        else:
            hi = mid - 1
    r = np.int64(sup[lo >> 7]) + np.int64(blk[lo])
    w = lo * _WORDS_PER_BLOCK
    nwords = len(words)
    while w < nwords:
        c = nb_popcount(words[w])
        if r + c >= j:
            x = words[w]
            for b in range(64):
                if (x >> np.uint64(b)) & _ONE:
                    r += 1
                    if r == j:
                        pos = w * 64 + b
                        return pos if pos < nbits else -1
        r += c
        w += 1
    return -1


@njit(cache=True, _nrt=False)
def nb_get_bits(words, bitpos, width):
    """Unsigned integer of ``width`` bits starting at ``bitpos``."""
    if width == 0:
        return np.int64(0)
    wi = bitpos >> 6
    off = np.uint64(bitpos & 63)
    v = words[wi] >> off
    if np.int64(off) + width > 64:
        v |= words[wi + 1] << (np.uint64(64) - off)
    if width < 64:
        v &= (_ONE << np.uint64(width)) - _ONE
    return np.int64(v)


@njit(cache=True)
def _rank_many(words, sup, blk, idx, out):
    for t in range(len(idx)):
        out[t] = nb_rank1(words, sup, blk, idx[t])


@njit(cache=True)
def _get_many(words, width, idx, out):
    for t in range(len(idx)):
        out[t] = nb_get_bits(words, idx[t] * width, width)


@njit(cache=True)
def _bits_many(words, pos, width, out):
    for t in range(len(pos)):
        out[t] = nb_get_bits(words, pos[t], width)


def get_bits_many(words: np.ndarray, pos, width: int) -> np.ndarray:
    """Vectorised ``width``-bit reads at arbitrary bit positions."""
    pos = np.ascontiguousarray(pos, dtype=np.int64)
    out = np.empty(len(pos), dtype=np.int64)
    _bits_many(words, pos, int(width), out)
    return out


def _pack_bits(bits: np.ndarray) -> np.ndarray:
    bits = np.asarray(bits, dtype=bool).ravel()
    raw = np.packbits(bits, bitorder="little")
    pad = (-len(raw)) % 8
    if pad:
        raw = np.concatenate([raw, np.zeros(pad, dtype=np.uint8)])
    return raw.view("<u8").astype(np.uint64)


class BitVector:
    """Immutable bit sequence with O(1) rank and O(log n) select."""

    __slots__ = ("words", "nbits", "_sup", "_blk", "_ones")

    def __init__(self, bits=()):
        bits = np.asarray(bits, dtype=bool).ravel()
        self._init(_pack_bits(bits), len(bits))

    @classmethod
    def from_words(cls, words, nbits: int) -> "BitVector":
        words = np.ascontiguousarray(words, dtype=np.uint64)
        need = (nbits + 63) // 64
        if len(words) != need:
            raise ValueError(f"{nbits} bits need {need} words, got {len(words)}")
        if nbits % 64 and need:
            words = words.copy()
            words[-1] &= (_ONE << np.uint64(nbits % 64)) - _ONE
        bv = cls.__new__(cls)
        bv._init(words, nbits)
        return bv

    def _init(self, words: np.ndarray, nbits: int) -> None:
        self.words = words
        self.nbits = int(nbits)
        pops = np.bitwise_count(words).astype(np.int64)
        cum = np.concatenate([[0], np.cumsum(pops)])
        nw = len(words)
        nblocks = self.nbits // BLOCK_BITS + 1
        nsup = self.nbits // SUPER_BITS + 1
        sup_at = np.minimum(np.arange(nsup) * (SUPER_BITS // 64), nw)
        blk_at = np.minimum(np.arange(nblocks) * _WORDS_PER_BLOCK, nw)
        self._sup = cum[sup_at].astype(np.uint64)
        self._blk = (cum[blk_at] - cum[sup_at[np.arange(nblocks) // _BLOCKS_PER_SUPER]]).astype(np.uint16)
        self._ones = int(cum[-1])
        for a in (self.words, self._sup, self._blk):
            a.flags.writeable = False

    def __len__(self) -> int:
        return self.nbits

    def __getitem__(self, i: int) -> int:
        i = self._check(i)
        return int((int(self.words[i >> 6]) >> (i & 63)) & 1)

    def __eq__(self, other) -> bool:
        return (isinstance(other, BitVector) and self.nbits == other.nbits
                and np.array_equal(self.words, other.words))

    def __repr__(self) -> str:
        return f"BitVector(len={self.nbits}, ones={self._ones})"

    def _check(self, i: int) -> int:
        i = int(i)
        if not 0 <= i < self.nbits:
            raise IndexError(f"bit index {i} out of range for length {self.nbits}")
        return i

    @property
    def ones(self) -> int:
        return self._ones

    def to_bools(self) -> np.ndarray:
        raw = self.words.astype("<u8").view(np.uint8)
        return np.unpackbits(raw, bitorder="little")[: self.nbits].astype(bool)

    def rank1(self, i: int) -> int:
        """Number of ones in positions ``0..i`` (inclusive)."""
        return int(nb_rank1(self.words, self._sup, self._blk, self._check(i)))

    def rank0(self, i: int) -> int:
        return self._check(i) + 1 - self.rank1(i)

    def rank1_many(self, idx) -> np.ndarray:
        idx = np.ascontiguousarray(idx, dtype=np.int64)
        if len(idx) and (idx.min() < 0 or idx.max() >= self.nbits):
            raise IndexError("bit index out of range")
        out = np.empty(len(idx), dtype=np.int64)
        _rank_many(self.words, self._sup, self._blk, idx, out)
        return out

    def select1(self, j: int) -> int:
        """Position of the ``j``-th one, counting from 1."""
        if not 1 <= j <= self._ones:
            raise IndexError(f"no occurrence {j}; vector holds {self._ones} ones")
        return int(nb_select1(self.words, self._sup, self._blk, self.nbits, int(j)))

    def size_in_bits(self) -> int:
        return 64 * (len(self.words) + len(self._sup)) + 16 * len(self._blk)

    def kernel_args(self):
        return self.words, self._sup, self._blk


class IntVector:
    """Fixed-width unsigned integers packed back to back in 64-bit words."""

    __slots__ = ("words", "width", "length")

    def __init__(self, values=(), width: int | None = None):
        values = np.asarray(values, dtype=np.int64).ravel()
        if len(values) and values.min() < 0:
            raise ValueError("IntVector stores non-negative values only")
        if width is None:
            width = int(values.max()).bit_length() if len(values) else 0
        if not 0 <= width <= 63:
            raise ValueError(f"unsupported width {width}")
        if len(values) and width < 63 and values.max() >= (1 << width):
            raise ValueError(f"value does not fit in {width} bits")
        self.width = int(width)
        self.length = len(values)
        if self.width == 0 or self.length == 0:
            self.words = np.zeros((self.length * self.width + 63) // 64, dtype=np.uint64)
        else:
            shifts = np.arange(self.width, dtype=np.int64)
            bits = (values[:, None] >> shifts) & 1
            self.words = _pack_bits(bits.astype(bool))
        self.words.flags.writeable = False

    @classmethod
    def from_words(cls, words, width: int, length: int) -> "IntVector":
        iv = cls.__new__(cls)
        iv.words = np.ascontiguousarray(words, dtype=np.uint64)
        iv.width, iv.length = int(width), int(length)
        if len(iv.words) != (iv.length * iv.width + 63) // 64:
            raise ValueError("word count does not match width and length")
        return iv

    def __len__(self) -> int:
        return self.length

    def __getitem__(self, i: int) -> int:
        i = int(i)
        if not 0 <= i < self.length:
            raise IndexError(f"index {i} out of range for length {self.length}")
        return int(nb_get_bits(self.words, i * self.width, self.width))

    def get_many(self, idx) -> np.ndarray:
        idx = np.ascontiguousarray(idx, dtype=np.int64)
        out = np.empty(len(idx), dtype=np.int64)
        _get_many(self.words, self.width, idx, out)
        return out

    def to_array(self) -> np.ndarray:
        return self.get_many(np.arange(self.length))

    def size_in_bits(self) -> int:
        return 64 * len(self.words)
