import numpy as np
import pytest

from k2agg.datasets import default_sigma, gen


def test_uniform_parameters():
    pts = gen(2048, 30, 128, 0, seed=1)
    assert len(pts) == round(2048 * 2048 * 0.3)
    assert pts.ws.min() >= 0 and pts.ws.max() == 127 and pts.d == 128


def test_fully_dense_single_weight():
    pts = gen(16, 100, 1, 0, seed=0)
    assert len(pts) == 256 and (pts.ws == 0).all()


def test_clusters_concentrate_points():
    s, p, c = 1024, 2, 8
    pts = gen(s, p, 16, c, seed=2)
    # regenerate the centres the same way the generator does
    centres = np.random.default_rng(2).uniform(0, s, size=(c, 2))
    sigma = default_sigma(s, len(pts), c)
    xy = np.stack([pts.xs, pts.ys], axis=1)
    dist = np.sqrt(((xy[:, None, :] - centres[None]) ** 2).sum(axis=2)).min(axis=1)
    assert (dist <= 3 * sigma).mean() >= 0.8


def test_saturated_clusters_still_reach_target():
    pts = gen(64, 90, 4, 1, seed=3, sigma=2.0)
    assert len(pts) == round(64 * 64 * 0.9)


def test_deterministic():
    a, b = gen(256, 5, 8, 3, seed=4), gen(256, 5, 8, 3, seed=4)
    assert a.tuples() == b.tuples()
    assert gen(256, 5, 8, 3, seed=5).tuples() != a.tuples()


@pytest.mark.parametrize("args", [(100, 10, 4, 0), (64, 0, 4, 0), (64, 101, 4, 0), (64, 5, 0, 0), (64, 5, 4, -1)])
def test_rejects_bad_parameters(args):
    with pytest.raises(ValueError):
        gen(*args)
