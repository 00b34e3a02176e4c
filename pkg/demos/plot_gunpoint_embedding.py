"""
Embedding GunPoint
------------------

MDS embeddings of the GunPoint training split from DGAP and from DTW,
scored with k-means. Falls back to synthetic data when the file is absent.
"""
import os

from pfgap.dataio import load_tsv, synth_dataset
from pfgap.distances import dataset_stats, default_measure, pairwise_distance_matrix
from pfgap.embedding import kmeans_cluster_score, mds_metric, mds_nonmetric
from pfgap.forest import ProximityForest
from pfgap.outlier import normalize_outlier_scores, raw_outlier_scores, top_outlier
from pfgap.plotting import scatter_svg
from pfgap.proximity import gap_dissimilarity, gap_proximities, symmetrize

path = os.path.join(os.path.dirname(__file__), "..", "tests", "data", "GunPoint_TRAIN.tsv")
ds = load_tsv(path) if os.path.exists(path) else synth_dataset(2, 25, 150, seed=1)

pf = ProximityForest(n_trees=100, seed=0).fit(ds)
P = symmetrize(gap_proximities(pf))
D = gap_dissimilarity(P)

# %%
# k-means score on both embeddings, for DGAP and for full-window DTW.
d_dtw = pairwise_distance_matrix(ds, default_measure("DTW", dataset_stats(ds)))
for name, d in (("DGAP", D), ("DTW", d_dtw)):
    sm = kmeans_cluster_score(mds_metric(d), ds.labels)
    sn = kmeans_cluster_score(mds_nonmetric(d), ds.labels)
    print(f"{name:5s} metric={sm:.2f} nonmetric={sn:.2f}")

# %%
# Scatter plot with the top within-class outlier in red.
scores = normalize_outlier_scores(raw_outlier_scores(P, ds.labels), ds.labels)
E = mds_metric(D)
scatter_svg(E.coordinates, "gunpoint_dgap.svg", [ds.label_names[c] for c in ds.labels],
            top_outlier(scores), title="DGAP, metric MDS")
print("wrote gunpoint_dgap.svg")
