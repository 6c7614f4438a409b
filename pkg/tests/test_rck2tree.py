import numpy as np
import pytest
from helpers import RUNNING_QUERY, random_grid, random_rects, running_points

from k2agg import CountingK2Tree, DenseGrid, KSchedule, QueryRect, WeightedPointSet, unzigzag, zigzag
from k2agg.datasets import gen
from k2agg.grid import morton_codes


def test_zigzag_examples():
    assert [zigzag(v) for v in (0, -1, 1, -2, 2, 3)] == [0, 1, 2, 3, 4, 6]
    v = np.arange(-10**6, 10**6 + 1)
    z = zigzag(v)
    assert np.array_equal(unzigzag(z), v)
    assert len(np.unique(z)) == len(v) and z.min() == 0
    assert all(unzigzag(zigzag(int(x))) == x for x in (-5, 0, 7, 2**31 - 1, -(2**31) + 1))


@pytest.fixture(scope="module")
def running():
    return CountingK2Tree.build(running_points(), KSchedule.uniform(2, 8))


def test_running_root_children(running):
    stored = running.counts.to_array()
    assert stored[0] == 22
    assert list(unzigzag(stored[1:4])) == [3, 0, -2]
    assert list(running.decoded_values()[1]) == [10, 7, 5]


def test_running_walkthrough(running):
    assert running.count(QueryRect(0, 1, 0, 2)) == 3
    assert running.node_value(0) == 10
    assert running.node_value(4) == 2
    assert running.count(RUNNING_QUERY) == 6
    assert running.count(QueryRect(0, 7, 0, 7)) == 22


def test_node_value_guards(running):
    with pytest.raises(ValueError):
        running.node_value(1)  # empty quadrant
    shallow = CountingK2Tree.build(running_points(), KSchedule.uniform(2, 8), aug_levels=2)
    with pytest.raises(ValueError):
        shallow.node_value(4)


def test_single_point_diffs_are_zero():
    tree = CountingK2Tree.build(WeightedPointSet([5], [9], rows=16, cols=16), KSchedule.uniform(2, 16))
    stored = tree.counts.to_array()
    assert stored[0] == 1 and (stored[1:] == 0).all()
    assert len(stored) == tree.base.height


def test_aug_levels_clamped():
    tree = CountingK2Tree.build(running_points(), KSchedule.uniform(2, 8), aug_levels=50)
    assert tree.aug_levels == 3
    with pytest.raises(ValueError):
        CountingK2Tree.build(running_points(), aug_levels=0)


def test_decoded_counts_match_oracle_submatrices():
    pts = gen(256, 5, 16, 8, seed=21)
    dense = pts.to_dense() >= 0
    tree = CountingK2Tree.build(pts)
    nodes_per_level = tree.decoded_values()
    sides = tree.base.schedule.sides()
    for lvl, vals in enumerate(nodes_per_level):
        s = sides[lvl]
        blocks = dense.reshape(256 // s, s, 256 // s, s).sum(axis=(1, 3)).ravel() if s < 256 else np.array([dense.sum()])
        # level order equals Morton order of the non-empty blocks
        by, bx = np.divmod(np.arange(blocks.size), 256 // s)
        order = np.argsort(morton_codes(bx * s, by * s, tree.base.schedule), kind="stable")
        want = blocks[order]
        assert np.array_equal(vals, want[want > 0])


@pytest.mark.parametrize("aug", [1, 2, 3, 4, 8, None])
def test_counts_and_sums_against_oracle(aug):
    rng = np.random.default_rng(5)
    for s, dens, d in ((70, 0.2, 9), (128, 0.05, 128), (16, 1.0, 3)):
        pts = random_grid(rng, s, dens, d)
        oracle = DenseGrid.from_points(pts)
        for sched in (None, KSchedule.uniform(2, s), KSchedule.uniform(3, s)):
            c = CountingK2Tree.build(pts, sched, aug_levels=aug)
            sm = CountingK2Tree.build(pts, sched, aug_levels=aug, mode="sum")
            for q in random_rects(rng, s, 30):
                assert c.count(q) == oracle.o_count(q) == c.base.count_by_traversal(q)
                assert sm.sum(q) == oracle.o_sum(q)


def test_child_sum_conservation():
    pts = gen(512, 2, 64, 4, seed=3)
    for mode, total in (("count", len(pts)), ("sum", int(pts.ws.sum()))):
        vals = CountingK2Tree.build(pts, mode=mode).decoded_values()
        assert vals[0][0] == total
        assert all(v.sum() == total for v in vals)


def test_unit_weights_sum_equals_count():
    pts = random_grid(np.random.default_rng(1), 40, 0.3, 1)
    pts = pts.with_weights(np.ones(len(pts), np.int64), d=2)
    c = CountingK2Tree.build(pts)
    s = CountingK2Tree.build(pts, mode="sum")
    for q in random_rects(np.random.default_rng(2), 40, 50):
        assert c.count(q) == s.sum(q)


def test_mode_mismatch_and_empty():
    c = CountingK2Tree.build(running_points())
    with pytest.raises(TypeError):
        c.sum(RUNNING_QUERY)
    with pytest.raises(TypeError):
        CountingK2Tree.build(running_points(), mode="sum").count(RUNNING_QUERY)
    empty = CountingK2Tree.build(WeightedPointSet([], [], rows=9, cols=9))
    assert empty.count(QueryRect(0, 8, 0, 8)) == 0
    single = CountingK2Tree.build(WeightedPointSet([2], [3], [7], rows=4, cols=4, d=8), mode="sum")
    assert single.sum(QueryRect(0, 3, 0, 3)) == 7 and single.sum(QueryRect(2, 2, 3, 3)) == 7
    assert single.sum(QueryRect(0, 1, 0, 3)) == 0


def test_fewer_levels_cost_less_space():
    pts = gen(1024, 1, 16, 8, seed=4)
    sizes = [CountingK2Tree.build(pts, aug_levels=a).overhead_bits() for a in (1, 2, 3, 4, 5)]
    assert sizes == sorted(sizes)


def test_isolated_point_costs_two_bits_per_level():
    side = 1024
    pts = WeightedPointSet([517], [90], rows=side, cols=side)
    c = CountingK2Tree.build(pts, KSchedule.uniform(2, side))
    values = c.counts.to_array()
    # root count, then a zero diff at each of the nine levels above the cell
    assert values.tolist() == [1] + [0] * 9
    # a single one-bit chunk plus its continuation bit per value
    assert c.counts.b == 1 and c.counts.level_sizes == (10,) and len(c.counts.cont) == 10
