"""GAP and original forest proximities, symmetrization and dissimilarities.

For an OOB index ``i`` of tree ``t``, the GAP proximity spreads a unit of
mass over the in-bag occupants of ``i``'s leaf in proportion to their
bootstrap multiplicities; row ``i`` is the average over the trees where
``i`` is OOB. Rows therefore sum to one and the proximity-weighted class
vote reproduces the forest's OOB vote.
"""
from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np
from scipy import sparse

from .forest import NEVER_OOB, ProximityForest

GAP = "gap"
ORIGINAL = "original"


@dataclass
class SparseProximityMatrix:
    """Row-indexed proximities stored as CSR.

    ``undefined_rows`` lists indices that were never OOB (GAP only); their
    rows are empty and must not be read as zero proximity.
    """

    matrix: sparse.csr_matrix
    kind: str
    undefined_rows: np.ndarray = field(default_factory=lambda: np.empty(0, dtype=np.int64))
    symmetrized: bool = False

    @property
    def n(self) -> int:
        return self.matrix.shape[0]

    @property
    def defined(self) -> np.ndarray:
        mask = np.ones(self.n, dtype=bool)
        mask[self.undefined_rows] = False
        return mask

    def row(self, i) -> dict:
        r = self.matrix.getrow(i)
        return dict(zip(r.indices.tolist(), r.data.tolist()))

    def toarray(self) -> np.ndarray:
        return self.matrix.toarray()


def gap_proximities(forest: ProximityForest) -> SparseProximityMatrix:
    """GAP proximities of a fitted forest.

    Tree contributions are accumulated in tree order and each row is
    divided by its number of OOB trees at the end.
    """
    oob = forest.oob_mask_
    if not forest.config.bootstrap or not oob.any():
        raise ValueError(
            "forest has no out-of-bag points (trained without bootstrap sampling?); "
            "GAP proximities are only defined for OOB indices")
    n = forest.labels_.shape[0]
    acc = sparse.csr_matrix((n, n))
    for t, tree in enumerate(forest.trees_):
        leaf = tree.leaf_of
        counts = tree.inbag
        inb = np.flatnonzero(counts)
        out = np.flatnonzero(counts == 0)
        if out.size == 0:
            continue
        # in-bag mass |M_i(t)| per leaf
        mass = np.bincount(leaf[inb], weights=counts[inb], minlength=tree.n_leaves)
        order = np.argsort(leaf[inb], kind="stable")
        inb_sorted = inb[order]
        starts = np.searchsorted(leaf[inb_sorted], np.arange(tree.n_leaves + 1))
        rows, cols, vals = [], [], []
        for i in out:
            lf = leaf[i]
            js = inb_sorted[starts[lf]:starts[lf + 1]]
            rows.append(np.full(js.size, i))
            cols.append(js)
            vals.append(counts[js] / mass[lf])
        Q = sparse.csr_matrix((np.concatenate(vals), (np.concatenate(rows), np.concatenate(cols))),
                              shape=(n, n))
        acc = acc + Q
    acc = acc.tocsr()
    acc.sort_indices()
    n_oob = oob.sum(axis=0)
    per_row = np.repeat(n_oob, np.diff(acc.indptr))
    acc.data = acc.data / per_row
    undefined = np.flatnonzero(n_oob == 0)
    return SparseProximityMatrix(acc, GAP, undefined)


def original_proximities(forest: ProximityForest) -> SparseProximityMatrix:
    """Fraction of trees in which two indices share a leaf (all points routed)."""
    n = forest.labels_.shape[0]
    acc = sparse.csr_matrix((n, n))
    for tree in forest.trees_:
        L = sparse.csr_matrix((np.ones(n), (np.arange(n), tree.leaf_of)),
                              shape=(n, tree.n_leaves))
        acc = acc + L @ L.T
    acc = acc.tocsr()
    acc.data = acc.data / forest.n_trees
    acc.sort_indices()
    return SparseProximityMatrix(acc, ORIGINAL)


def symmetrize(p: SparseProximityMatrix) -> SparseProximityMatrix:
    """``P(i, j) = (p(i, j) + p(j, i)) / 2``.

    For an undefined row ``i`` only the column values exist, so
    ``P(i, j) = p(j, i)`` is used for those pairs.
    """
    M = p.matrix
    sym = (M + M.T) * 0.5
    undefined = p.undefined_rows
    if undefined.size:
        # pairs touching an undefined row had only one of the two terms
        D = sparse.diags(np.isin(np.arange(p.n), undefined).astype(float))
        sym = sym + (D @ M.T + M @ D) * 0.5
    sym = sparse.csr_matrix(sym)
    sym.eliminate_zeros()
    sym.sort_indices()
    return SparseProximityMatrix(sym, p.kind, undefined.copy(), symmetrized=True)


def gap_dissimilarity(P, exponent: int = 2) -> np.ndarray:
    """Dense dissimilarity ``(1 - P) ** exponent`` with a zero diagonal."""
    if exponent not in (1, 2):
        raise ValueError("exponent must be 1 or 2")
    M = P.toarray() if hasattr(P, "toarray") else np.asarray(P, dtype=float)
    if not np.allclose(M, M.T, atol=1e-12):
        raise ValueError("proximity matrix must be symmetric; call symmetrize() first")
    d = (1.0 - M) ** exponent
    np.fill_diagonal(d, 0.0)
    return d


def proximity_weighted_predict(p: SparseProximityMatrix, labels, return_ties=False):
    """Class with the largest proximity mass in each row.

    Ties (within 1e-9) go to the lowest class; undefined rows get
    :data:`~pfgap.forest.NEVER_OOB`.
    """
    labels = np.asarray(labels)
    k = int(labels.max()) + 1
    Y = sparse.csr_matrix((np.ones(labels.shape[0]), (np.arange(labels.shape[0]), labels)),
                          shape=(labels.shape[0], k))
    scores = (p.matrix @ Y).toarray()
    pred = np.argmax(scores, axis=1)
    top = scores.max(axis=1, keepdims=True)
    tied = (np.abs(scores - top) <= 1e-9).sum(axis=1) > 1
    pred[p.undefined_rows] = NEVER_OOB
    tied[p.undefined_rows] = False
    if return_ties:
        return pred, tied
    return pred

