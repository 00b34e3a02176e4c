"""
Elastic distances
-----------------

Compare the nine distance measures on a pair of shifted sine waves.
Elastic measures absorb the shift; Euclidean distance does not.
"""
import numpy as np

from pfgap.distances import KINDS, default_measure, distance

t = np.linspace(0, 1, 60, endpoint=False)
a = np.sin(2 * np.pi * t)
b = np.sin(2 * np.pi * (t - 0.1))

# %%
# Each measure with its baseline parameters.
for kind in KINDS:
    m = default_measure(kind, {"sigma": float(np.std(np.r_[a, b]))})
    print(f"{kind:6s} {distance(m, a, b):10.4f}   {m.params()}")

# %%
# A zero window is squared Euclidean distance; wider bands absorb the shift.
from pfgap.distances import DistanceMeasure

for w in (0.0, 0.05, 0.1, 0.2, 1.0):
    print(f"DTW window={w:<4} {distance(DistanceMeasure('DTW', window=w), a, b):.4f}")
