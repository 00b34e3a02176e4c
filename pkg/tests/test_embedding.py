import numpy as np
import pytest
from scipy.spatial.distance import pdist, squareform

from pfgap.embedding import (
    Embedding,
    classical_scaling,
    cluster_label_mapping,
    kmeans_cluster_score,
    mds_metric,
    mds_nonmetric,
    raw_stress,
)


def random_dissimilarity(rng, n):
    pts = rng.normal(size=(n, int(rng.integers(2, 6))))
    d = squareform(pdist(pts)) * rng.uniform(0.5, 2.0)
    noise = rng.uniform(0.8, 1.2, size=(n, n))
    d = d * (noise + noise.T) / 2
    np.fill_diagonal(d, 0.0)
    return d


def test_equilateral_triangle():
    d = 1.0 - np.eye(3)
    E = mds_metric(d)
    np.testing.assert_allclose(pdist(E.coordinates), 1.0, atol=1e-6)
    assert E.stress < 1e-10


def test_all_zero_input():
    with pytest.warns(UserWarning):
        E = mds_metric(np.zeros((4, 4)))
    np.testing.assert_array_equal(E.coordinates, 0.0)
    with pytest.warns(UserWarning):
        assert mds_nonmetric(np.zeros((3, 3))).stress == 0.0


@pytest.mark.parametrize("bad", [
    np.array([[0.0, np.nan], [np.nan, 0.0]]),
    np.array([[0.0, 1.0], [2.0, 0.0]]),
    np.array([[0.0, -1.0], [-1.0, 0.0]]),
])
def test_rejects_invalid(bad):
    with pytest.raises(ValueError):
        mds_metric(bad)


def test_stress_homogeneity():
    rng = np.random.default_rng(0)
    d = random_dissimilarity(rng, 12)
    E = mds_metric(d)
    assert raw_stress(2 * d, 2 * E.coordinates) == pytest.approx(4 * E.stress, rel=1e-12)
    E2 = mds_metric(2 * d)
    np.testing.assert_allclose(E2.coordinates, 2 * E.coordinates, rtol=1e-6, atol=1e-8)


def test_stress_trace_non_increasing():
    rng = np.random.default_rng(1)
    for _ in range(10):
        E = mds_metric(random_dissimilarity(rng, int(rng.integers(4, 30))))
        assert np.all(np.diff(E.stress_trace) <= 1e-12)
        assert E.stress >= 0 and np.all(np.isfinite(E.coordinates))


def test_random_restarts_never_worse():
    rng = np.random.default_rng(2)
    d = random_dissimilarity(rng, 15)
    assert mds_metric(d, n_init=4, seed=0).stress <= mds_metric(d).stress


def test_permutation_equivariance():
    rng = np.random.default_rng(3)
    d = random_dissimilarity(rng, 10)
    perm = rng.permutation(10)
    a = mds_metric(d).coordinates
    b = mds_metric(d[np.ix_(perm, perm)]).coordinates
    np.testing.assert_allclose(pdist(a[perm]), pdist(b), atol=1e-6)


def test_classical_scaling_recovers_plane():
    pts = np.random.default_rng(4).normal(size=(8, 2))
    X = classical_scaling(squareform(pdist(pts)))
    np.testing.assert_allclose(pdist(X), pdist(pts), atol=1e-9)


def test_nonmetric_line():
    x = np.arange(8, dtype=float)
    d = np.abs(x[:, None] - x[None, :])
    E = mds_nonmetric(d)
    assert not E.metric
    assert E.stress < 1e-3


def test_nonmetric_monotone_invariance():
    rng = np.random.default_rng(5)
    d = random_dissimilarity(rng, 15)
    a, b = mds_nonmetric(d), mds_nonmetric(d ** 3)
    assert abs(a.stress - b.stress) < 1e-3
    x = np.arange(8, dtype=float)
    line = np.abs(x[:, None] - x[None, :])
    assert abs(mds_nonmetric(line).stress - mds_nonmetric(line ** 3).stress) < 1e-3


def test_nonmetric_trace_non_increasing():
    rng = np.random.default_rng(6)
    for _ in range(5):
        E = mds_nonmetric(random_dissimilarity(rng, 20))
        assert np.all(np.diff(E.stress_trace) <= 1e-12)


def test_two_points():
    d = np.array([[0.0, 3.0], [3.0, 0.0]])
    for E in (mds_metric(d), mds_nonmetric(d)):
        assert E.stress == pytest.approx(0.0, abs=1e-12)
    assert pdist(mds_metric(d).coordinates)[0] == pytest.approx(3.0)


def test_kmeans_separated_blobs():
    rng = np.random.default_rng(7)
    X = np.r_[rng.normal(size=(20, 2)), rng.normal(size=(20, 2)) + 20]
    labels = np.r_[np.zeros(20, int), np.ones(20, int)]
    assert kmeans_cluster_score(Embedding(X, 0.0, True), labels) == 1.0
    assert kmeans_cluster_score(X, 1 - labels) == 1.0


def test_kmeans_chance_level():
    scores = []
    for seed in range(30):
        rng = np.random.default_rng(seed)
        X = rng.normal(size=(60, 2))
        scores.append(kmeans_cluster_score(X, rng.integers(0, 2, size=60), seed=seed))
    assert min(scores) >= 0.5
    assert np.mean(scores) == pytest.approx(0.5, abs=0.08)


def test_kmeans_rejects_large_k():
    with pytest.raises(ValueError):
        kmeans_cluster_score(np.zeros((2, 2)), [0, 1], k=3)


def test_mapping_is_bijection():
    clusters = np.array([0, 0, 1, 1, 2, 2, 2])
    labels = np.array([5, 5, 7, 7, 9, 9, 5])
    m = cluster_label_mapping(clusters, labels)
    assert m == {0: 5, 1: 7, 2: 9}
    assert len(set(m.values())) == 3
