import numpy as np
import pytest

from pfgap.dataio import synth_dataset
from pfgap.forest import ForestConfig, Node, ProximityForest, ProximityTree, SeriesStore


def hand_forest(series, labels, trees):
    """Forest from explicit ``(inbag_counts, leaf_of, leaf_labels)`` triples.

    Nodes are single leaves; only the bookkeeping used by the proximity
    code is populated.
    """
    pf = ProximityForest.from_config(ForestConfig(n_trees=len(trees)))
    pf.store_ = SeriesStore(series)
    pf.labels_ = np.asarray(labels)
    pf.n_classes_ = int(pf.labels_.max()) + 1
    pf.label_names_ = []
    pf.trees_ = []
    for inbag, leaf_of, leaf_labels in trees:
        nodes = [Node(label=int(c), leaf=k) for k, c in enumerate(leaf_labels)]
        pf.trees_.append(ProximityTree(nodes, np.asarray(inbag), np.asarray(leaf_of),
                                       np.asarray(leaf_labels)))
    pf._index()
    return pf


@pytest.fixture(scope="session")
def sine_square():
    return synth_dataset(classes=2, per_class=15, length=60, noise=0.1, seed=3)


@pytest.fixture(scope="session")
def fitted(sine_square):
    return ProximityForest(n_trees=30, seed=11).fit(sine_square)
