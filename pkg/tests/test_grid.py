import numpy as np
import pytest

from k2agg import KSchedule, QueryRect, WeightedPointSet
from k2agg.grid import morton_codes, zorder_codes


def test_pointset_validation():
    with pytest.raises(ValueError, match="duplicate"):
        WeightedPointSet([1, 1], [2, 2], [0, 0])
    with pytest.raises(ValueError):
        WeightedPointSet([5], [0], [0], rows=4, cols=4)
    with pytest.raises(ValueError):
        WeightedPointSet([0], [0], [9], d=4)
    p = WeightedPointSet([0, 3], [1, 2])
    assert p.rows == 3 and p.cols == 4 and p.d == 2 and list(p.ws) == [1, 1]


def test_dense_roundtrip():
    cells = np.array([[-1, 2], [0, -1]])
    p = WeightedPointSet.from_dense(cells)
    assert p.tuples() == [(1, 0, 2), (0, 1, 0)]
    assert np.array_equal(p.to_dense(), cells)


def test_schedules():
    assert KSchedule.uniform(2, 8).ks == (2, 2, 2)
    assert KSchedule.uniform(2, 5).n == 8
    assert KSchedule.uniform(3, 10).ks == (3, 3, 3)
    h = KSchedule.hybrid(1 << 20)
    assert h.ks == (4,) * 6 + (2,) * 8 and h.n == 1 << 20
    assert KSchedule.hybrid(1).height == 1
    s = KSchedule.parse("4x2,2x3")
    assert s.ks == (4, 4, 2, 2, 2) and str(s) == "4x2,2x3"
    assert list(s.sides()) == [128, 32, 8, 4, 2, 1]
    with pytest.raises(ValueError):
        KSchedule(((1, 2),))


def test_query_rect():
    q = QueryRect(2, 5, 1, 1)
    assert q.area == 4 and q.contains(2, 1) and not q.contains(2, 2)
    assert QueryRect(-3, 2, 6, 20).clamp(8) == QueryRect(0, 2, 6, 7)
    assert QueryRect(9, 12, 0, 0).clamp(8) is None
    with pytest.raises(ValueError):
        QueryRect(3, 2, 0, 0).validate()


def test_morton_matches_zorder_for_k2():
    rng = np.random.default_rng(0)
    xs, ys = rng.integers(0, 64, 500), rng.integers(0, 64, 500)
    a = morton_codes(xs, ys, KSchedule.uniform(2, 64))
    b = zorder_codes(xs, ys).astype(np.int64)
    assert np.array_equal(a, b)


def test_morton_digit_order():
    # left-to-right, then top-to-bottom
    sched = KSchedule.uniform(2, 2)
    assert list(morton_codes([0, 1, 0, 1], [0, 0, 1, 1], sched)) == [0, 1, 2, 3]
