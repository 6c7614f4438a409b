import numpy as np
import pytest

from k2agg import DacSequence


def test_empty_sequence():
    d = DacSequence([])
    assert len(d) == 0 and d.levels == 0
    with pytest.raises(IndexError):
        d[0]


def test_small_values_use_one_level():
    d = DacSequence([0, 1, 2, 3], b=2)
    assert d.levels == 1 and list(d.to_array()) == [0, 1, 2, 3]


def test_multilevel_layout():
    d = DacSequence([5, 300, 2, 70000], b=4)
    assert list(d.to_array()) == [5, 300, 2, 70000]
    assert d.level_sizes == (4, 2, 2, 1, 1)


@pytest.mark.parametrize("b", [1, 2, 3, 4, 7, 8])
def test_roundtrip_skewed(b):
    rng = np.random.default_rng(b)
    vals = rng.geometric(0.2, 10**5) - 1
    vals[::997] = rng.integers(0, 1 << 40, len(vals[::997]))
    d = DacSequence(vals, b=b)
    assert np.array_equal(d.to_array(), vals)
    assert d[12345] == vals[12345]


def test_rejects_negative_and_bad_chunk():
    with pytest.raises(ValueError):
        DacSequence([1, -2])
    with pytest.raises(ValueError):
        DacSequence([1], b=0)


def test_from_parts_rebuilds():
    vals = np.arange(200) * 37
    d = DacSequence(vals, b=3)
    again = DacSequence.from_parts(d.chunks, d.cont, len(d))
    assert again.level_sizes == d.level_sizes
    assert np.array_equal(again.to_array(), vals)


def test_small_values_are_compact():
    small = DacSequence(np.zeros(10000, np.int64), b=2)
    assert small.size_in_bits() < 10000 * 2 * 1.1 + 10000 * 1.1
