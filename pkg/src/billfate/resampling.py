"""SMOTE oversampling of the minority class (training split only)."""

from dataclasses import dataclass, replace

import numpy as np

from .errors import DataError
from .rng import make_rng


@dataclass(frozen=True)
class SmoteConfig:
    k_neighbors: int = 5
    target: str = "equalize"
    seed: int = 0

    def __post_init__(self):
        if self.k_neighbors < 1:
            raise DataError("k_neighbors must be >= 1")
        if self.target != "equalize":
            raise DataError(f"unsupported SMOTE target {self.target!r}")


def nearest_neighbors(points, k):
    """Indices of the ``k`` nearest other rows of ``points`` (Euclidean, ties -> lower index)."""
    diff = points[:, None, :] - points[None, :, :]
    dist = np.einsum("ijk,ijk->ij", diff, diff)
    np.fill_diagonal(dist, np.inf)
    # stable sort keeps lower indices first among equal distances
    return np.argsort(dist, axis=1, kind="stable")[:, :k]


def smote_samples(minority, n_new, k, rng):
    """``n_new`` synthetic rows ``a + u * (b - a)``; also returns the (a, b) index pairs."""
    n_min = len(minority)
    k = min(k, n_min - 1)
    nbrs = nearest_neighbors(minority, k)
    order = rng.permutation(n_min)
    base = order[np.arange(n_new) % n_min]
    pick = rng.integers(0, k, size=n_new)
    other = nbrs[base, pick]
    u = rng.random(n_new)
    a, b = minority[base], minority[other]
    return a + u[:, None] * (b - a), base, other


def smote(train, config):
    """Append synthetic minority rows until both classes have equal counts.

    Original rows come first, unchanged. Base points cycle round-robin over a
    seeded shuffle of the minority rows.
    """
    y = train.labels
    if y is None:
        raise DataError("SMOTE needs a labelled matrix")
    counts = np.bincount(y, minlength=2)
    if counts.min() == 0:
        raise DataError("SMOTE needs both classes present")
    minority_label = int(np.argmin(counts)) if counts[0] != counts[1] else 1
    minority = train.values[y == minority_label]
    if len(minority) < 2:
        raise DataError("SMOTE needs at least 2 minority rows")
    n_new = int(counts.max() - counts.min())
    if n_new == 0:
        return train
    rng = make_rng(config.seed)
    synth, _, _ = smote_samples(minority, n_new, config.k_neighbors, rng)
    ids = None if train.ids is None else train.ids + tuple(f"smote-{i}" for i in range(n_new))
    return replace(
        train,
        values=np.vstack([train.values, synth]),
        labels=np.concatenate([y, np.full(n_new, minority_label, dtype=y.dtype)]),
        ids=ids,
    )
