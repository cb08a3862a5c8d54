import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from oracles import kmeanspp_oracle_draw, lloyd_oracle, nearest_scan
from phfusion.codebook import (
    Codebook,
    build_codebook,
    kmeanspp_init,
    kmeanspp_probabilities,
    lloyd,
    random_init,
)
from phfusion.errors import NotEnoughDistinctPoints


def _blobs(seed, n_per=100, dim=128, spread=0.3, sep=10.0):
    rng = np.random.default_rng(seed)
    means = rng.normal(size=(3, dim))
    means *= sep / np.linalg.norm(means, axis=1, keepdims=True)
    X = np.concatenate([m + spread * rng.normal(size=(n_per, dim)) for m in means])
    return X, np.repeat(np.arange(3), n_per)


# ---------------------------------------------------------------- kmeans++

def test_dsquared_probability():
    p = kmeanspp_probabilities([[0.0], [1.0], [100.0]], chosen=[0])
    assert p[2] == pytest.approx(100 ** 2 / (1 + 100 ** 2), rel=1e-12)
    assert p[2] == pytest.approx(0.99990, abs=5e-6)
    assert p[0] == 0.0


def test_all_points_become_centres():
    pts = np.random.default_rng(0).normal(size=(6, 4))
    cen = kmeanspp_init(pts, 6, seed=3)
    assert sorted(map(tuple, cen)) == sorted(map(tuple, pts))


def test_not_enough_distinct_points():
    pts = np.array([[1.0, 2.0]] * 5 + [[0.0, 0.0]])
    with pytest.raises(NotEnoughDistinctPoints):
        kmeanspp_init(pts, 3)
    with pytest.raises(NotEnoughDistinctPoints):
        random_init(pts, 3)


def test_duplicates_still_give_distinct_centres():
    pts = np.array([[0.0]] * 50 + [[1.0]] * 50 + [[5.0]])
    for seed in range(20):
        cen = kmeanspp_init(pts, 3, seed)
        assert len({float(c) for c in cen.ravel()}) == 3


def test_first_centre_uniform_and_second_follows_dsquared():
    # empirical check of the sampler against the explicit probability table
    pts = np.array([[0.0], [1.0], [3.0], [7.0]])
    counts = np.zeros((4, 4))
    for seed in range(4000):
        cen = kmeanspp_init(pts, 2, seed).ravel()
        i = int(np.flatnonzero(pts.ravel() == cen[0])[0])
        j = int(np.flatnonzero(pts.ravel() == cen[1])[0])
        counts[i, j] += 1
    first = counts.sum(axis=1) / counts.sum()
    assert np.allclose(first, 0.25, atol=0.03)
    for i in range(4):
        expect = kmeanspp_probabilities(pts, [i])
        got = counts[i] / counts[i].sum()
        assert np.allclose(got, expect, atol=0.05)


def test_seeds_land_in_distinct_blobs():
    X, blob = _blobs(0, sep=30.0)
    rng = np.random.default_rng(99)
    trials = 1000
    hits_pp = sum(len(set(blob[_rows_of(X, kmeanspp_init(X, 3, seed=t))])) == 3
                  for t in range(trials))
    hits_oracle = sum(len(set(blob[kmeanspp_oracle_draw(X, 3, rng)])) == 3 for _ in range(200))
    hits_rand = sum(len(set(blob[rng.choice(len(X), 3, replace=False)])) == 3
                    for _ in range(trials))
    assert hits_pp / trials >= 0.95
    assert hits_oracle / 200 >= 0.95
    # uniform seeding lands in three distinct blobs only about 2/9 of the time
    assert hits_rand / trials < 0.35


def _rows_of(X, centres):
    return [int(np.flatnonzero(np.all(X == c, axis=1))[0]) for c in centres]


def test_kmeanspp_deterministic():
    X, _ = _blobs(1, n_per=20, dim=8)
    assert np.array_equal(kmeanspp_init(X, 4, 11), kmeanspp_init(X, 4, 11))
    assert not np.array_equal(kmeanspp_init(X, 4, 11), kmeanspp_init(X, 4, 12))


# ---------------------------------------------------------------- lloyd

def test_lloyd_closed_form():
    cb = lloyd([[0.0], [1.0], [9.0], [10.0]], [[0.0], [10.0]])
    assert cb.centers.ravel().tolist() == [0.5, 9.5]
    assert cb.n_updates == 1
    assert cb.inertia == pytest.approx(1.0)


def test_lloyd_fixed_point():
    cb = lloyd([[0.0], [1.0], [9.0], [10.0]], [[0.5], [9.5]])
    assert cb.n_updates == 0
    assert cb.history == (1.0,)


@pytest.mark.parametrize("seed", range(3))
def test_lloyd_matches_oracle(seed):
    rng = np.random.default_rng(seed)
    pts = rng.normal(size=(200, 3))
    init = pts[rng.choice(200, 5, replace=False)]
    cb = lloyd(pts, init, max_iter=100, tol=1e-4)
    ref_c, ref_inertia, ref_hist = lloyd_oracle(pts, init, 100, 1e-4)
    assert np.allclose(cb.centers, ref_c, atol=1e-12)
    assert cb.inertia == pytest.approx(ref_inertia, rel=1e-12)
    assert len(cb.history) == len(ref_hist)
    assert all(b <= a + 1e-12 for a, b in zip(cb.history, cb.history[1:]))
    assert cb.inertia <= min(cb.history) + 1e-12


def test_empty_cluster_reseeded_at_farthest_point():
    pts = np.array([[0.0], [1.0], [2.0], [50.0]])
    cb = lloyd(pts, [[1.0], [100.0], [200.0]], max_iter=1)
    # centres 100 and 200 attract nobody; the two points farthest from
    # their own centre (50, then 0 at distance 1) take their places
    assert cb.centers.ravel().tolist() == [pytest.approx(13.25), 50.0, 0.0]
    ref_c, _, _ = lloyd_oracle(pts, [[1.0], [100.0], [200.0]], max_iter=1)
    assert np.allclose(cb.centers, ref_c)


@settings(max_examples=25, deadline=None)
@given(st.integers(0, 10_000), st.integers(2, 6))
def test_inertia_non_increasing(seed, V):
    rng = np.random.default_rng(seed)
    pts = rng.normal(size=(60, 2)) * rng.uniform(0.1, 5)
    cb = lloyd(pts, kmeanspp_init(pts, V, seed), max_iter=50, tol=0.0)
    h = np.array(cb.history)
    assert np.all(np.diff(h) <= 1e-9 * max(1.0, h[0]))


# ---------------------------------------------------------------- assign

def _codebook(centers):
    return Codebook(np.asarray(centers, dtype=np.float64))


def test_assign_exact_centre():
    cen = np.random.default_rng(0).normal(size=(10, 128))
    assert _codebook(cen).assign(cen[7]) == 7


def test_assign_tie_goes_to_lowest_index():
    cen = np.zeros((6, 2))
    cen[:, 0] = [10, 10, -1, 20, 20, 1]
    assert _codebook(cen).assign([0.0, 0.0]) == 2


def test_assign_matches_scan():
    rng = np.random.default_rng(5)
    cen = rng.normal(size=(20, 128))
    desc = rng.normal(size=(100, 128))
    assert np.array_equal(_codebook(cen).assign_many(desc), nearest_scan(desc, cen))


# ---------------------------------------------------------------- build

def test_build_codebook_deterministic_and_distinct():
    X, _ = _blobs(3, n_per=40, dim=16)
    a = build_codebook(X, 6, seed=42)
    b = build_codebook(X, 6, seed=42)
    assert np.array_equal(a.centers, b.centers)
    assert a.inertia == b.inertia
    assert len(np.unique(a.centers, axis=0)) == 6
    assert a.size == 6 and a.dim == 16 and a.rng_seed == 42


def test_build_codebook_subsamples():
    X = np.random.default_rng(0).normal(size=(500, 4))
    cb = build_codebook(X, 3, seed=0, max_points=100)
    assert cb.size == 3
