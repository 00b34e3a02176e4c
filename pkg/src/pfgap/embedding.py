"""Metric and non-metric MDS by stress majorization, plus k-means scoring."""
from __future__ import annotations

import warnings
from dataclasses import dataclass, field

import numpy as np
from scipy.optimize import isotonic_regression, linear_sum_assignment
from scipy.spatial.distance import pdist, squareform
from scipy.stats import rankdata


@dataclass
class Embedding:
    """Point configuration returned by :func:`mds_metric` / :func:`mds_nonmetric`.

    ``stress`` is the raw stress ``sum_{i<j} (d_ij - |x_i - x_j|)^2`` for
    metric runs and Kruskal's stress-1 for non-metric runs;
    ``stress_trace`` records it after every iteration.
    """

    coordinates: np.ndarray
    stress: float
    metric: bool
    stress_trace: list = field(default_factory=list)
    n_iter: int = 0
    ids: np.ndarray | None = None

    @property
    def n(self):
        return self.coordinates.shape[0]

    @property
    def dim(self):
        return self.coordinates.shape[1]


def check_dissimilarity(d) -> np.ndarray:
    d = np.asarray(d, dtype=float)
    if d.ndim != 2 or d.shape[0] != d.shape[1]:
        raise ValueError("dissimilarity matrix must be square")
    if not np.all(np.isfinite(d)):
        raise ValueError("dissimilarity matrix contains NaN or infinite values")
    if np.any(d < 0):
        raise ValueError("dissimilarities must be non-negative")
    if not np.allclose(d, d.T, rtol=0, atol=1e-12):
        raise ValueError("dissimilarity matrix must be symmetric")
    d = (d + d.T) / 2
    np.fill_diagonal(d, 0.0)
    return d


def classical_scaling(d, dim=2) -> np.ndarray:
    """Torgerson scaling: top eigenvectors of the double-centred squared matrix.

    Eigenvector signs are fixed so the largest-magnitude entry is positive.
    """
    n = d.shape[0]
    J = np.eye(n) - 1.0 / n
    B = -0.5 * J @ (d ** 2) @ J
    w, V = np.linalg.eigh(B)
    top = np.argsort(w)[::-1][:dim]
    w, V = w[top], V[:, top]
    signs = np.sign(V[np.argmax(np.abs(V), axis=0), np.arange(V.shape[1])])
    signs[signs == 0] = 1
    return V * signs * np.sqrt(np.clip(w, 0, None))


def raw_stress(d, X) -> float:
    iu = np.triu_indices(d.shape[0], 1)
    return float(np.sum((d[iu] - pdist(X)) ** 2))


def guttman_transform(delta, X) -> np.ndarray:
    """One majorization step ``X <- B(X) X / n`` for unit weights."""
    n = X.shape[0]
    dist = squareform(pdist(X))
    with np.errstate(divide="ignore", invalid="ignore"):
        B = np.where(dist > 0, -delta / dist, 0.0)
    np.fill_diagonal(B, 0.0)
    np.fill_diagonal(B, -B.sum(axis=1))
    return B @ X / n


def _smacof(d, X, max_iter, tol):
    stress = raw_stress(d, X)
    trace = [stress]
    it = 0
    for it in range(1, max_iter + 1):
        X_new = guttman_transform(d, X)
        new = raw_stress(d, X_new)
        X, prev, stress = X_new, stress, new
        trace.append(stress)
        if stress == 0 or (prev - stress) <= tol * prev:
            break
    return X, stress, trace, it


def mds_metric(d, dim: int = 2, max_iter: int = 300, tol: float = 1e-6,
               init=None, n_init: int = 1, seed=None) -> Embedding:
    """Metric SMACOF from a classical-scaling start.

    With ``n_init > 1`` further runs start from random configurations drawn
    with ``seed``; the lowest-stress run is returned. Iteration stops when
    the relative stress decrease falls below ``tol``.
    """
    d = check_dissimilarity(d)
    n = d.shape[0]
    if n < 2:
        raise ValueError("need at least 2 points")
    if not np.any(d > 0):
        warnings.warn("all dissimilarities are zero; every point is placed at the origin")
        return Embedding(np.zeros((n, dim)), 0.0, True, [0.0], 0)
    starts = [classical_scaling(d, dim) if init is None else np.asarray(init, dtype=float)]
    if not np.any(pdist(starts[0]) > 0):
        warnings.warn("degenerate classical-scaling start; using a random start")
        starts = []
    rng = np.random.default_rng(seed)
    while len(starts) < max(n_init, 1):
        starts.append(rng.normal(scale=d.max(), size=(n, dim)))
    best = None
    for X0 in starts:
        X, stress, trace, it = _smacof(d, X0, max_iter, tol)
        if best is None or stress < best.stress:
            best = Embedding(X, stress, True, trace, it)
    return best


def _stress1(dist, dhat):
    ss = np.sum(dist ** 2)
    return float(np.sqrt(np.sum((dist - dhat) ** 2) / ss)) if ss > 0 else 0.0


def mds_nonmetric(d, dim: int = 2, max_iter: int = 300, tol: float = 1e-6,
                  seed=None) -> Embedding:
    """Non-metric SMACOF minimizing Kruskal stress-1.

    Starts from the metric solution of the rank image of ``d``, so the
    result depends on ``d`` only through its rank order. Disparities come
    from isotonic regression of the current distances in the order of
    ``d`` (tied dissimilarities ordered by current distance). An iteration
    that would raise stress-1 is discarded and ends the run.
    """
    d = check_dissimilarity(d)
    n = d.shape[0]
    if not np.any(d > 0):
        warnings.warn("all dissimilarities are zero; every point is placed at the origin")
        return Embedding(np.zeros((n, dim)), 0.0, False, [0.0], 0)
    iu = np.triu_indices(n, 1)
    dv = d[iu]
    ranks = np.zeros((n, n))
    ranks[iu] = rankdata(dv)
    ranks = ranks + ranks.T
    X = mds_metric(ranks, dim, max_iter=max_iter, tol=tol, seed=seed).coordinates
    n_pairs = dv.size

    def fit_disparities(X):
        dist = pdist(X)
        order = np.lexsort((dist, dv))
        dhat = np.empty_like(dist)
        dhat[order] = isotonic_regression(dist[order]).x
        return dist, dhat

    dist, dhat = fit_disparities(X)
    stress = _stress1(dist, dhat)
    trace = [stress]
    it = 0
    for it in range(1, max_iter + 1):
        if stress == 0:
            break
        scale = np.sqrt(n_pairs / np.sum(dhat ** 2))
        target = np.zeros((n, n))
        target[iu] = dhat * scale
        X_new = guttman_transform(target + target.T, X)
        dist_new, dhat_new = fit_disparities(X_new)
        new = _stress1(dist_new, dhat_new)
        if new > stress:
            break
        prev = stress
        X, dhat, stress = X_new, dhat_new, new
        trace.append(stress)
        if prev - stress <= tol * prev:
            break
    return Embedding(X, stress, False, trace, it)


def cluster_label_mapping(clusters, labels) -> dict:
    """Accuracy-maximizing one-to-one map from cluster ids to class labels."""
    cl = np.unique(clusters)
    lb = np.unique(labels)
    C = np.array([[np.sum((clusters == c) & (labels == y)) for y in lb] for c in cl])
    rows, cols = linear_sum_assignment(-C)
    return {int(cl[r]): int(lb[c]) for r, c in zip(rows, cols)}


def kmeans_cluster_score(E, labels, k: int | None = None, n_init: int = 10,
                         max_iter: int = 300, seed=0) -> float:
    """k-means on embedding coordinates scored as mapped classification accuracy.

    ``E`` is an :class:`Embedding` or a coordinate array; ``k`` defaults to
    the number of distinct labels.
    """
    from sklearn.cluster import KMeans

    X = E.coordinates if isinstance(E, Embedding) else np.asarray(E, dtype=float)
    labels = np.asarray(labels)
    k = k or np.unique(labels).size
    if k > X.shape[0]:
        raise ValueError("k cannot exceed the number of points")
    km = KMeans(n_clusters=k, n_init=n_init, max_iter=max_iter, random_state=seed)
    with warnings.catch_warnings():
        # duplicate points can leave fewer distinct clusters than k
        warnings.simplefilter("ignore")
        clusters = km.fit_predict(X)
    mapping = cluster_label_mapping(clusters, labels)
    predicted = np.array([mapping.get(int(c), -1) for c in clusters])
    return float(np.mean(predicted == labels))
