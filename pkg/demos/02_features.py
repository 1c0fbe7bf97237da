"""
Feature groups and scaling
==========================

Turn bills into the eleven feature groups, look at the column layout and
standardise the numeric columns with statistics from the training rows only.
"""

import numpy as np

from billfate.corpus import generate_synthetic_corpus, kenya_shaped_spec, synthetic_vocabulary
from billfate.embeddings import generate_synthetic_embeddings, tokenize
from billfate.evaluation import split_70_30
from billfate.features import GROUP_TITLES, FeatureConfig, apply_scaler, featurize_corpus, fit_scaler

spec = kenya_shaped_spec()
records = generate_synthetic_corpus(spec, seed=1)

# %%
# Word vectors: a random table over the generator's vocabulary stands in for
# pretrained embeddings. Unknown tokens are skipped when averaging.
table = generate_synthetic_embeddings(synthetic_vocabulary(spec), dim=16, seed=0)
print(tokenize(records[0].title))

# %%
fm = featurize_corpus(records, table, FeatureConfig())
print("matrix", fm.values.shape)
for name, start, stop in fm.schema.groups:
    print(f"{name:4s} [{start:3d}, {stop:3d})  {GROUP_TITLES[name]}")

# %%
# Fit the scaler on the training split, then apply it to both splits.
tr, te = split_70_30(fm.labels, seed=0)
scaler = fit_scaler(fm.subset(tr))
train = apply_scaler(scaler, fm.subset(tr))
test = apply_scaler(scaler, fm.subset(te))
cols = fm.schema.scaled_columns()
print("scaled columns:", cols)
print("train means ~0:", np.round(train.values[:, cols].mean(axis=0), 12))
