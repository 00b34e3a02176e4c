"""Proximity trees and bootstrap-trained proximity forests.

A proximity tree splits a node by picking one exemplar series per class
and sending every series down the branch of its nearest exemplar under a
randomly drawn distance measure. Each tree is grown on a size-``n``
bootstrap sample so that every tree has an out-of-bag (OOB) set, which
the GAP proximities in :mod:`pfgap.proximity` rely on.
"""
from __future__ import annotations

import json
import logging
from dataclasses import asdict, dataclass, field

import numpy as np

from . import _kernels
from .distances import (
    DERIVATIVE_KINDS,
    KINDS,
    DistanceMeasure,
    as_series,
    dataset_stats,
    derivative_transform,
    pad_series,
    sample_parameters,
)

logger = logging.getLogger(__name__)

NEVER_OOB = -1
FORMAT_NAME = "pfgap-forest"
FORMAT_VERSION = 1


@dataclass
class ForestConfig:
    """Hyperparameters of a :class:`ProximityForest`.

    ``selection_scope`` is ``"per-split"`` (a distance measure is drawn for
    every candidate split) or ``"per-tree"`` (one measure kind per tree,
    parameters still drawn per candidate).
    """

    n_trees: int = 100
    r: int = 5
    max_depth: int | None = None
    measures: tuple = KINDS
    selection_scope: str = "per-split"
    bootstrap: bool = True
    seed: int = 0
    n_jobs: int = 1

    def __post_init__(self):
        self.measures = tuple(self.measures)
        if self.n_trees < 1:
            raise ValueError("n_trees must be >= 1")
        if self.r < 1:
            raise ValueError("r must be >= 1")
        if self.max_depth is not None and self.max_depth < 0:
            raise ValueError("max_depth must be >= 0")
        if self.selection_scope not in ("per-split", "per-tree"):
            raise ValueError("selection_scope must be 'per-split' or 'per-tree'")
        if not self.measures:
            raise ValueError("at least one distance measure is required")
        for k in self.measures:
            if k not in KINDS:
                raise ValueError(f"unknown distance measure {k!r}")


class SeriesStore:
    """Padded raw and derivative views of a list of series."""

    def __init__(self, series):
        self.series = [as_series(s) for s in series]
        self.X, self.lens = pad_series(self.series)
        if min(self.lens) >= 3:
            self.dX, self.dlens = pad_series([derivative_transform(s) for s in self.series])
        else:
            self.dX = self.dlens = None

    def __len__(self):
        return len(self.series)

    def view(self, measure: DistanceMeasure):
        if measure.uses_derivative:
            if self.dX is None:
                raise ValueError("derivative measures need series of length >= 3")
            return self.dX, self.dlens
        return self.X, self.lens

    def row(self, i, measure):
        X, lens = self.view(measure)
        return X[i, :lens[i]]


@dataclass
class Node:
    """Tree node. Leaves have ``leaf >= 0`` and no exemplars."""

    label: int
    leaf: int = -1
    measure: DistanceMeasure | None = None
    exemplars: list = field(default_factory=list)
    children: list = field(default_factory=list)

    @property
    def is_leaf(self):
        return self.leaf >= 0


@dataclass
class ProximityTree:
    nodes: list
    inbag: np.ndarray       # bootstrap multiplicity c_j for each training index
    leaf_of: np.ndarray     # leaf reached by each training index
    leaf_labels: np.ndarray

    @property
    def oob(self) -> np.ndarray:
        return np.flatnonzero(self.inbag == 0)

    @property
    def inbag_multiset(self) -> np.ndarray:
        return np.repeat(np.arange(self.inbag.shape[0]), self.inbag)

    @property
    def n_leaves(self):
        return self.leaf_labels.shape[0]


def bootstrap_sample(n: int, rng: np.random.Generator):
    """Draw ``n`` indices with replacement.

    Returns the per-index multiplicities and the sorted OOB indices.
    """
    if n < 2:
        raise ValueError("bootstrap needs n >= 2")
    counts = np.bincount(rng.integers(0, n, size=n), minlength=n)
    return counts, np.flatnonzero(counts == 0)


def _gini(y, w, n_classes):
    p = np.bincount(y, weights=w, minlength=n_classes) / w.sum()
    return 1.0 - np.dot(p, p)


def _majority(y, w, n_classes):
    return int(np.argmax(np.bincount(y, weights=w, minlength=n_classes)))


def _distances(store, exemplar_store, exemplars, measure, idx):
    """``len(exemplars) x len(idx)`` distances from exemplars to store rows."""
    code, p = measure.kernel_args()
    X, lens = store.view(measure)
    out = np.empty((len(exemplars), idx.shape[0]))
    for k, e in enumerate(exemplars):
        out[k] = _kernels.one_to_many(code, exemplar_store.row(e, measure), X, lens, idx, p)
    return out


def grow_tree(store: SeriesStore, labels, inbag, config: ForestConfig, rng,
              stats: dict | None = None, kinds=None) -> ProximityTree:
    """Grow one proximity tree on the in-bag multiset ``inbag`` (multiplicities).

    In-bag multiplicities act as case weights for Gini impurity and exemplar
    sampling. The candidate with the largest weighted Gini decrease wins;
    ties keep the first candidate drawn. Branches that receive no data are
    dropped from the split.
    """
    labels = np.asarray(labels)
    inbag = np.asarray(inbag, dtype=np.int64)
    n = labels.shape[0]
    n_classes = int(labels.max()) + 1
    stats = stats or dataset_stats(store.series)
    kinds = tuple(kinds or config.measures)
    members = np.flatnonzero(inbag)
    if members.size == 0:
        raise ValueError("in-bag sample is empty")
    tree_kind = kinds[rng.integers(len(kinds))] if config.selection_scope == "per-tree" else None

    nodes = [None]
    leaf_labels = []
    leaf_of = np.full(n, -1, dtype=np.int64)
    stack = [(0, members, inbag[members], 0)]
    while stack:
        nid, idx, w, depth = stack.pop()
        y = labels[idx]
        majority = _majority(y, w, n_classes)
        classes = np.unique(y)
        split = None
        if classes.size > 1 and (config.max_depth is None or depth < config.max_depth):
            split = _best_split(store, idx, y, w, classes, n_classes, config.r,
                                kinds, tree_kind, stats, rng)
        if split is None:
            nodes[nid] = Node(label=majority, leaf=len(leaf_labels))
            leaf_of[idx] = len(leaf_labels)
            leaf_labels.append(majority)
            continue
        measure, exemplars, branch = split
        kept = [b for b in range(len(exemplars)) if np.any(branch == b)]
        node = Node(label=majority, measure=measure,
                    exemplars=[exemplars[b] for b in kept])
        nodes[nid] = node
        for b in kept:
            cid = len(nodes)
            nodes.append(None)
            node.children.append(cid)
            mask = branch == b
            stack.append((cid, idx[mask], w[mask], depth + 1))
    return ProximityTree(nodes, inbag, leaf_of, np.array(leaf_labels, dtype=np.int64))


def _best_split(store, idx, y, w, classes, n_classes, r, kinds, tree_kind, stats, rng):
    parent = _gini(y, w, n_classes)
    total = w.sum()
    best, best_gain = None, -np.inf
    for _ in range(r):
        kind = tree_kind or kinds[rng.integers(len(kinds))]
        measure = sample_parameters(kind, stats, rng)
        exemplars = []
        for c in classes:
            in_c = y == c
            cum = np.cumsum(w[in_c])
            pick = np.searchsorted(cum, rng.integers(cum[-1]), side="right")
            exemplars.append(int(idx[in_c][pick]))
        branch = np.argmin(_distances(store, store, exemplars, measure, idx), axis=0)
        if np.all(branch == branch[0]):
            continue
        child = 0.0
        for b in np.unique(branch):
            mask = branch == b
            child += w[mask].sum() / total * _gini(y[mask], w[mask], n_classes)
        gain = parent - child
        if gain > best_gain:
            best, best_gain = (measure, exemplars, branch), gain
    return best


def route_batch(tree: ProximityTree, train: SeriesStore, query: SeriesStore, idx=None):
    """Leaf id reached by each query row (nearest exemplar, ties to lowest branch)."""
    idx = np.arange(len(query)) if idx is None else np.asarray(idx, dtype=np.int64)
    out = np.empty(idx.shape[0], dtype=np.int64)
    stack = [(0, np.arange(idx.shape[0]))]
    while stack:
        nid, pos = stack.pop()
        node = tree.nodes[nid]
        if node.is_leaf:
            out[pos] = node.leaf
            continue
        if pos.size == 0:
            continue
        D = _distances(query, train, node.exemplars, node.measure, idx[pos])
        branch = np.argmin(D, axis=0)
        for b, cid in enumerate(node.children):
            stack.append((cid, pos[branch == b]))
    return out


def route(tree: ProximityTree, train: SeriesStore, x) -> int:
    """Leaf id reached by a single series."""
    return int(route_batch(tree, train, SeriesStore([x]))[0])


def _vote(leaf_classes, n_classes):
    """Majority over columns of an ``(m, T)`` class array; ties to lowest class."""
    counts = np.zeros((leaf_classes.shape[0], n_classes), dtype=np.int64)
    for c in range(n_classes):
        counts[:, c] = (leaf_classes == c).sum(axis=1)
    return np.argmax(counts, axis=1), counts


def _fit_one(t, store, labels, config, stats, kinds):
    rng = np.random.default_rng(np.random.SeedSequence(config.seed, spawn_key=(t,)))
    n = len(store)
    if config.bootstrap:
        counts, oob = bootstrap_sample(n, rng)
    else:
        counts, oob = np.ones(n, dtype=np.int64), np.empty(0, dtype=np.int64)
    tree = grow_tree(store, labels, counts, config, rng, stats, kinds)
    if oob.size:
        tree.leaf_of[oob] = route_batch(tree, store, store, oob)
    return tree


class ProximityForest:
    """Bootstrap-trained proximity forest.

    Parameters match :class:`ForestConfig`. After :meth:`fit`, the forest
    keeps the training series (exemplars are referenced by training index),
    per-tree bootstrap multiplicities and the leaf reached by every
    training index in every tree.

    Examples
    --------
    >>> from pfgap.dataio import synth_dataset
    >>> ds = synth_dataset(2, 10, 30, noise=0.1, seed=1)
    >>> pf = ProximityForest(n_trees=10, seed=0).fit(ds)
    >>> pf.predict(ds.series[:2]).tolist()
    [0, 0]
    """

    def __init__(self, n_trees=100, r=5, max_depth=None, measures=KINDS,
                 selection_scope="per-split", bootstrap=True, seed=0, n_jobs=1):
        self.config = ForestConfig(n_trees, r, max_depth, measures, selection_scope,
                                   bootstrap, seed, n_jobs)

    @classmethod
    def from_config(cls, config: ForestConfig):
        pf = cls.__new__(cls)
        pf.config = config
        return pf

    def fit(self, X, y=None) -> "ProximityForest":
        """Fit on a :class:`~pfgap.dataio.TimeSeriesDataset` or (series, labels)."""
        if y is None:
            series, y = X.series, X.labels
            self.label_names_ = list(getattr(X, "label_names", []))
        else:
            series = X
            self.label_names_ = []
        y = np.asarray(y, dtype=np.int64)
        if len(series) < 2:
            raise ValueError("training needs at least 2 series")
        if np.unique(y).size < 2:
            raise ValueError("training needs at least 2 classes")
        if y.min() < 0:
            raise ValueError("labels must be non-negative integers")
        self.store_ = SeriesStore(series)
        self.labels_ = y
        self.n_classes_ = int(y.max()) + 1
        self.stats_ = dataset_stats(self.store_.series)
        kinds = self.config.measures
        if self.store_.dX is None and any(k in DERIVATIVE_KINDS for k in kinds):
            kinds = tuple(k for k in kinds if k not in DERIVATIVE_KINDS)
            logger.warning("series shorter than 3 points: derivative measures disabled")
            if not kinds:
                raise ValueError("no usable distance measure for series of length 2")
        self.kinds_ = kinds
        args = (self.store_, y, self.config, self.stats_, kinds)
        T = self.config.n_trees
        if self.config.n_jobs == 1:
            self.trees_ = [_fit_one(t, *args) for t in range(T)]
        else:
            from joblib import Parallel, delayed
            self.trees_ = Parallel(n_jobs=self.config.n_jobs)(
                delayed(_fit_one)(t, *args) for t in range(T))
        self._index()
        never = self.never_oob_
        if never.size:
            logger.info("%d training indices are in-bag in every tree", never.size)
        return self

    def _index(self):
        self.inbag_ = np.stack([t.inbag for t in self.trees_])
        self.leaves_ = np.stack([t.leaf_of for t in self.trees_])
        self.leaf_classes_ = np.stack([t.leaf_labels[t.leaf_of] for t in self.trees_])

    # -- bookkeeping -------------------------------------------------------

    @property
    def n_trees(self):
        return len(self.trees_)

    @property
    def oob_mask_(self) -> np.ndarray:
        """``(T, n)`` boolean, True where index is OOB in tree."""
        return self.inbag_ == 0

    @property
    def never_oob_(self) -> np.ndarray:
        return np.flatnonzero(~self.oob_mask_.any(axis=0))

    def coverage_report(self) -> dict:
        oob_counts = self.oob_mask_.sum(axis=0)
        return {"n": int(oob_counts.shape[0]), "n_trees": self.n_trees,
                "never_oob": self.never_oob_.tolist(),
                "min_oob_trees": int(oob_counts.min()),
                "mean_oob_trees": float(oob_counts.mean())}

    # -- prediction ----------------------------------------------------------

    def apply(self, series) -> np.ndarray:
        """``(m, T)`` leaf ids for new series."""
        query = SeriesStore(series)
        return np.stack([route_batch(t, self.store_, query) for t in self.trees_], axis=1)

    def predict(self, series) -> np.ndarray:
        """Majority vote of tree leaf classes; ties go to the lowest class."""
        leaves = self.apply(series)
        classes = np.stack([t.leaf_labels[leaves[:, k]] for k, t in enumerate(self.trees_)],
                           axis=1)
        return _vote(classes, self.n_classes_)[0]

    def oob_votes(self) -> np.ndarray:
        """``(n, n_classes)`` vote counts over each index's OOB trees."""
        classes = np.where(self.oob_mask_, self.leaf_classes_, -1).T
        return _vote(classes, self.n_classes_)[1]

    def oob_predict(self, i=None):
        """OOB majority vote for training index ``i`` (all indices if ``None``).

        Indices that are never OOB get :data:`NEVER_OOB`.
        """
        votes = self.oob_votes()
        pred = np.argmax(votes, axis=1)
        pred[votes.sum(axis=1) == 0] = NEVER_OOB
        return pred if i is None else int(pred[i])

    def oob_accuracy(self) -> float:
        pred = self.oob_predict()
        ok = pred != NEVER_OOB
        return float(np.mean(pred[ok] == self.labels_[ok]))

    # -- serialization -------------------------------------------------------

    def to_dict(self) -> dict:
        cfg = asdict(self.config)
        cfg["measures"] = list(cfg["measures"])
        trees = []
        for t in self.trees_:
            trees.append({
                "inbag": t.inbag.tolist(),
                "leaf_of": t.leaf_of.tolist(),
                "leaf_labels": t.leaf_labels.tolist(),
                "nodes": [{"label": nd.label, "leaf": nd.leaf,
                           "measure": nd.measure.to_dict() if nd.measure else None,
                           "exemplars": list(nd.exemplars),
                           "children": list(nd.children)} for nd in t.nodes],
            })
        return {
            "format": FORMAT_NAME, "version": FORMAT_VERSION, "config": cfg,
            "kinds": list(self.kinds_), "stats": self.stats_,
            "label_names": self.label_names_,
            "training": {"labels": self.labels_.tolist(),
                         "series": [s.tolist() for s in self.store_.series]},
            "trees": trees,
        }

    @classmethod
    def from_dict(cls, d: dict) -> "ProximityForest":
        if d.get("format") != FORMAT_NAME:
            raise ValueError("not a pfgap forest model")
        if d.get("version") != FORMAT_VERSION:
            raise ValueError(f"unsupported model version {d.get('version')}")
        pf = cls.from_config(ForestConfig(**d["config"]))
        pf.store_ = SeriesStore([np.array(s) for s in d["training"]["series"]])
        pf.labels_ = np.array(d["training"]["labels"], dtype=np.int64)
        pf.n_classes_ = int(pf.labels_.max()) + 1
        pf.stats_ = d["stats"]
        pf.kinds_ = tuple(d["kinds"])
        pf.label_names_ = d.get("label_names", [])
        pf.trees_ = []
        for td in d["trees"]:
            nodes = [Node(label=nd["label"], leaf=nd["leaf"],
                          measure=DistanceMeasure.from_dict(nd["measure"]) if nd["measure"] else None,
                          exemplars=nd["exemplars"], children=nd["children"])
                     for nd in td["nodes"]]
            pf.trees_.append(ProximityTree(nodes, np.array(td["inbag"], dtype=np.int64),
                                           np.array(td["leaf_of"], dtype=np.int64),
                                           np.array(td["leaf_labels"], dtype=np.int64)))
        pf._index()
        return pf

    def save(self, path) -> None:
        with open(path, "w") as fh:
            json.dump(self.to_dict(), fh)

    @classmethod
    def load(cls, path) -> "ProximityForest":
        with open(path) as fh:
            return cls.from_dict(json.load(fh))


def fit(dataset, config: ForestConfig | None = None, **kwargs) -> ProximityForest:
    """Fit a forest on ``dataset``; keyword arguments override ``config``."""
    config = config or ForestConfig(**kwargs)
    return ProximityForest.from_config(config).fit(dataset)
