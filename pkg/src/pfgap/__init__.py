"""Proximity forests on univariate series, with GAP proximities, embeddings and outlier scores.

Modules
-------
distances   nine elastic and lock-step distance measures
forest      bootstrap proximity forest classifier
proximity   GAP and original forest proximities, dissimilarities
embedding   metric / non-metric MDS and the k-means clustering score
outlier     within-class outlier scores, LOF, 1-NN baselines, F1 protocol
dataio      dataset files, synthetic data, matrix formats
pipeline    end-to-end runs and the evaluation tables
"""
from .dataio import TimeSeriesDataset, ValidationError, load_tsv, synth_dataset
from .distances import KINDS, DistanceMeasure, distance, pairwise_distance_matrix
from .embedding import Embedding, kmeans_cluster_score, mds_metric, mds_nonmetric
from .forest import NEVER_OOB, ForestConfig, ProximityForest
from .outlier import (lof, misclassified_outlier_f1, normalize_outlier_scores,
                      one_nn_predict, raw_outlier_scores, top_outlier)
from .proximity import (SparseProximityMatrix, gap_dissimilarity, gap_proximities,
                        original_proximities, proximity_weighted_predict, symmetrize)

__version__ = "0.1.0"
