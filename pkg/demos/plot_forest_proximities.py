"""
Forest proximities
------------------

Fit a proximity forest, compute GAP proximities and check that the
proximity-weighted vote gives back the out-of-bag predictions.
"""
import numpy as np

from pfgap.dataio import synth_dataset
from pfgap.forest import ProximityForest
from pfgap.proximity import gap_proximities, proximity_weighted_predict, symmetrize

ds = synth_dataset(classes=3, per_class=15, length=60, noise=0.3, seed=0)
pf = ProximityForest(n_trees=100, seed=0).fit(ds)
print("OOB accuracy:", pf.oob_accuracy())

# %%
# Rows of the GAP matrix are probability vectors over training indices.
p = gap_proximities(pf)
print("row sums:", np.asarray(p.matrix.sum(axis=1)).ravel()[:5])
print("never out-of-bag:", p.undefined_rows.tolist())

# %%
# The class with the most proximity mass is the OOB vote.
pred = proximity_weighted_predict(p, pf.labels_)
print("agreement with OOB vote:", np.mean(pred == pf.oob_predict()))

# %%
# The symmetric version feeds embeddings and outlier scores.
P = symmetrize(p)
print("nonzeros:", P.matrix.nnz, "of", P.n ** 2)
