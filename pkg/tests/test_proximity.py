import numpy as np
import pytest
from scipy import sparse

from pfgap.dataio import synth_dataset
from pfgap.forest import NEVER_OOB, ProximityForest
from pfgap.proximity import (
    GAP,
    SparseProximityMatrix,
    gap_dissimilarity,
    gap_proximities,
    original_proximities,
    proximity_weighted_predict,
    symmetrize,
)

from conftest import hand_forest
from oracles import naive_gap

THREE = [[0.0, 1.0], [1.0, 0.0], [2.0, 2.0]]


def test_hand_forest_gap_values():
    pf = hand_forest(THREE, [0, 1, 1], [([0, 2, 1], [0, 0, 0], [1])])
    p = gap_proximities(pf)
    assert p.row(0) == {1: 2 / 3, 2: 1 / 3}
    assert p.toarray()[0, 0] == 0.0
    np.testing.assert_array_equal(p.undefined_rows, [1, 2])


def test_hand_forest_weighted_predict():
    pf = hand_forest(THREE, [0, 1, 0], [([0, 2, 1], [0, 0, 0], [1])])
    p = gap_proximities(pf)
    # mass 2/3 on index 1 (class 1) against 1/3 on index 2 (class 0)
    assert proximity_weighted_predict(p, pf.labels_)[0] == 1
    assert proximity_weighted_predict(p, pf.labels_)[1] == NEVER_OOB


def test_no_shared_leaf_zero():
    pf = hand_forest(THREE, [0, 1, 1], [([0, 2, 1], [0, 0, 1], [1, 1])])
    assert gap_proximities(pf).toarray()[0, 2] == 0.0


def test_rows_sum_to_one(fitted):
    p = gap_proximities(fitted)
    sums = np.asarray(p.matrix.sum(axis=1)).ravel()[p.defined]
    np.testing.assert_allclose(sums, 1.0, atol=1e-9)
    dense = p.toarray()
    assert dense.min() >= 0.0 and dense.max() <= 1.0
    assert np.all(np.diag(dense) == 0.0)


def test_no_bootstrap_is_an_error(sine_square):
    pf = ProximityForest(n_trees=2, bootstrap=False).fit(sine_square)
    with pytest.raises(ValueError, match="bootstrap"):
        gap_proximities(pf)


@pytest.mark.parametrize("seed", range(20))
def test_matches_naive_evaluator(seed):
    rng = np.random.default_rng(seed)
    n = int(rng.integers(6, 21))
    ds = synth_dataset(2, n // 2, 16, noise=0.8, seed=seed)
    pf = ProximityForest(n_trees=int(rng.integers(1, 11)), r=2, seed=seed).fit(ds)
    P, defined = naive_gap(pf.inbag_, pf.leaves_, len(ds))
    p = gap_proximities(pf)
    np.testing.assert_array_equal(p.toarray(), P)
    np.testing.assert_array_equal(p.defined, defined)


def test_original_proximities(fitted):
    p = original_proximities(fitted).toarray()
    np.testing.assert_array_equal(np.diag(p), 1.0)
    np.testing.assert_array_equal(p, p.T)
    pf2 = hand_forest(THREE, [0, 1, 1], [([1, 1, 1], [0, 0, 1], [1, 1]),
                                          ([1, 1, 1], [0, 1, 1], [1, 1])])
    assert original_proximities(pf2).toarray()[0, 1] == 0.5


def test_original_symmetric_random_seeds(sine_square):
    for seed in range(3):
        p = original_proximities(ProximityForest(n_trees=5, seed=seed).fit(sine_square))
        assert (p.matrix != p.matrix.T).nnz == 0


def _mat(dense, undefined=()):
    return SparseProximityMatrix(sparse.csr_matrix(np.array(dense, dtype=float)), GAP,
                                 np.array(undefined, dtype=np.int64))


def test_symmetrize_mean():
    P = symmetrize(_mat([[0, 0.2], [0.4, 0]])).toarray()
    assert P[0, 1] == pytest.approx(0.3) and P[1, 0] == pytest.approx(0.3)


def test_symmetrize_identity_on_symmetric():
    M = [[0, 0.5, 0.5], [0.5, 0, 0.5], [0.5, 0.5, 0]]
    np.testing.assert_array_equal(symmetrize(_mat(M)).toarray(), M)


def test_symmetrize_undefined_rows():
    # row 1 never OOB: only p(0,1) and p(2,1) exist for pairs touching index 1
    P = symmetrize(_mat([[0, 0.6, 0.4], [0, 0, 0], [0.5, 0.5, 0]], undefined=[1])).toarray()
    np.testing.assert_allclose(P, [[0, 0.6, 0.45], [0.6, 0, 0.5], [0.45, 0.5, 0]])
    np.testing.assert_array_equal(symmetrize(_mat([[0, 0.6, 0.4], [0, 0, 0], [0.5, 0.5, 0]],
                                                  undefined=[1])).undefined_rows, [1])


def test_symmetrize_random_forests(sine_square):
    for seed in range(3):
        P = symmetrize(gap_proximities(ProximityForest(n_trees=8, seed=seed).fit(sine_square)))
        assert abs(P.matrix - P.matrix.T).max() == 0
        assert P.toarray().max() <= 1.0


def test_dissimilarity_endpoints_and_exponent():
    P = np.array([[1.0, 0.0, 0.5], [0.0, 1.0, 1.0], [0.5, 1.0, 1.0]])
    d2 = gap_dissimilarity(P)
    assert d2[0, 1] == 1.0 and d2[1, 2] == 0.0 and d2[0, 2] == 0.25
    assert np.all(np.diag(d2) == 0)
    assert gap_dissimilarity(P, exponent=1)[0, 2] == 0.5
    with pytest.raises(ValueError):
        gap_dissimilarity(P, exponent=3)


def test_dissimilarity_rank_order(fitted):
    P = symmetrize(gap_proximities(fitted))
    iu = np.triu_indices(P.n, 1)
    d1, d2 = gap_dissimilarity(P, 1)[iu], gap_dissimilarity(P, 2)[iu]
    np.testing.assert_array_equal(np.argsort(d1, kind="stable"), np.argsort(d2, kind="stable"))
    d = gap_dissimilarity(P)
    np.testing.assert_array_equal(d, d.T)
    assert np.all(np.isfinite(d)) and d.min() >= 0


def test_weighted_predict_reconstructs_oob_vote(sine_square):
    noisy = synth_dataset(3, 10, 30, noise=0.7, seed=5)
    for ds in (sine_square, noisy):
        for seed in range(3):
            pf = ProximityForest(n_trees=25, seed=seed).fit(ds)
            pred, tied = proximity_weighted_predict(gap_proximities(pf), pf.labels_,
                                                    return_ties=True)
            oob = pf.oob_predict()
            keep = ~tied & (oob != NEVER_OOB)
            np.testing.assert_array_equal(pred[keep], oob[keep])
