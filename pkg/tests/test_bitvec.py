import numpy as np
import pytest

from k2agg import BitVector, IntVector
from k2agg.bitvec import BLOCK_BITS, SUPER_BITS


def test_empty_vector():
    bv = BitVector([])
    assert len(bv) == 0 and bv.ones == 0
    with pytest.raises(IndexError):
        bv.rank1(0)
    with pytest.raises(IndexError):
        bv.select1(1)


def test_small_vector_rank_select():
    bv = BitVector([1, 0, 1, 1])
    assert len(bv) == 4 and bv.ones == 3
    assert bv.rank1(0) == 1 and bv.rank1(3) == 3
    assert bv.rank0(1) == 1
    assert bv.select1(1) == 0 and bv.select1(3) == 3
    with pytest.raises(IndexError):
        bv.select1(4)
    with pytest.raises(IndexError):
        bv.rank1(4)


def test_million_bits_access():
    src = np.random.default_rng(42).random(10**6) < 0.5
    bv = BitVector(src)
    assert np.array_equal(bv.to_bools(), src)
    idx = np.random.default_rng(0).integers(0, len(src), 2000)
    assert all(bv[i] == src[i] for i in idx)


def test_rank_matches_linear_scan():
    src = np.random.default_rng(7).random(4096) < 0.3
    bv = BitVector(src)
    assert np.array_equal(bv.rank1_many(np.arange(4096)), np.cumsum(src))


def test_select_inverts_rank():
    src = np.random.default_rng(7).random(4096) < 0.3
    bv = BitVector(src)
    for j in range(1, bv.ones + 1):
        p = bv.select1(j)
        assert src[p] and bv.rank1(p) == j


@pytest.mark.parametrize("n", [SUPER_BITS - 1, SUPER_BITS, SUPER_BITS + 1, 3 * SUPER_BITS + 77])
def test_directory_boundaries(n):
    rng = np.random.default_rng(n)
    src = rng.random(n) < 0.01
    src[-1] = True
    bv = BitVector(src)
    cum = np.cumsum(src)
    probes = np.unique(np.concatenate([
        np.arange(0, n, BLOCK_BITS), np.arange(BLOCK_BITS - 1, n, BLOCK_BITS),
        [n - 1], rng.integers(0, n, 500)]))
    assert np.array_equal(bv.rank1_many(probes), cum[probes])
    ones = np.flatnonzero(src)
    for j in rng.integers(1, len(ones) + 1, 200):
        assert bv.select1(int(j)) == ones[j - 1]


def test_directory_overhead_below_six_percent():
    n = 10**6
    bv = BitVector(np.zeros(n, bool))
    assert bv.size_in_bits() <= 1.06 * n + 256


def test_from_words_roundtrip_and_masking():
    src = np.random.default_rng(3).random(1000) < 0.5
    bv = BitVector(src)
    dirty = bv.words.copy()
    dirty[-1] |= np.uint64(1) << np.uint64(63)
    again = BitVector.from_words(dirty, 1000)
    assert again == bv and again.ones == bv.ones
    with pytest.raises(ValueError):
        BitVector.from_words(bv.words[:-1], 1000)


def test_intvector_roundtrip():
    vals = np.random.default_rng(5).integers(0, 1 << 13, 5000)
    iv = IntVector(vals)
    assert iv.width == 13
    assert np.array_equal(iv.to_array(), vals)
    assert iv[4999] == vals[4999]
    with pytest.raises(ValueError):
        IntVector([8], width=3)
    with pytest.raises(ValueError):
        IntVector([-1])


def test_intvector_zero_width():
    iv = IntVector([0, 0, 0])
    assert iv.width == 0 and list(iv.to_array()) == [0, 0, 0]


def test_intvector_wide_values():
    vals = np.array([(1 << 62) + 5, 3, (1 << 61)], dtype=np.int64)
    assert np.array_equal(IntVector(vals, width=63).to_array(), vals)
