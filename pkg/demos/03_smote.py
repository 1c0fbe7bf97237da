"""
Oversampling the minority class
===============================

SMOTE places new minority rows on segments between a minority row and one of
its nearest minority neighbours until both classes have the same count.
"""

import numpy as np

from billfate.features import FeatureMatrix, FeatureSchema
from billfate.resampling import SmoteConfig, nearest_neighbors, smote

rng = np.random.default_rng(0)
X = np.vstack([rng.normal(0.0, 1.0, size=(40, 2)), rng.normal(3.0, 0.5, size=(6, 2))])
y = np.array([0] * 40 + [1] * 6)
train = FeatureMatrix(X, FeatureSchema((("X", 0, 2),)), y)

# %%
out = smote(train, SmoteConfig(k_neighbors=3, seed=1))
print("class counts before", np.bincount(y), "after", np.bincount(out.labels))
print("original rows untouched:", np.array_equal(out.values[:len(X)], X))

# %%
# Every synthetic row sits inside the bounding box of the minority points.
minority = X[y == 1]
synth = out.values[len(X):]
print("inside box:", np.all((synth >= minority.min(0)) & (synth <= minority.max(0))))
print("3-NN of minority row 0:", nearest_neighbors(minority, 3)[0])
