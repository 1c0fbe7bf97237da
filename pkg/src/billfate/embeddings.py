"""Pre-trained word vectors (GloVe text format), tokenization and mean pooling."""

import re
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from .errors import CorpusParseError, DataError
from .rng import make_rng

_SPLIT = re.compile(r"[\W_]+")


def tokenize(text):
    """Lowercase, then split on every run of non-alphanumeric characters.

    >>> tokenize("The Finance Bill, 2018")
    ['the', 'finance', 'bill', '2018']
    """
    return [t for t in _SPLIT.split(text.lower()) if t]


@dataclass(frozen=True)
class EmbeddingTable:
    dim: int
    index: dict  # token -> row of ``vectors``
    vectors: np.ndarray = field(repr=False)
    duplicate_warnings: int = 0

    @property
    def vocab_size(self):
        return len(self.index)

    def __contains__(self, token):
        return token in self.index

    def __getitem__(self, token):
        return self.vectors[self.index[token]]

    @classmethod
    def from_dict(cls, entries, dim=None):
        tokens = list(entries)
        if dim is None:
            dim = len(next(iter(entries.values()))) if entries else 0
        vecs = np.array([np.asarray(entries[t], float) for t in tokens], float).reshape(len(tokens), dim)
        for t in tokens:
            if not t:
                raise DataError("empty token in embedding table")
        vecs.setflags(write=False)
        return cls(dim=dim, index={t: i for i, t in enumerate(tokens)}, vectors=vecs)


def load_embeddings(path, expected_dim):
    """Read a GloVe-style text file: ``token v1 ... vd`` per line.

    A repeated token keeps its first vector; later copies are counted in
    ``duplicate_warnings``.
    """
    path = Path(path)
    index, rows, problems, dups = {}, [], [], 0
    with path.open(encoding="utf-8") as fh:
        for no, line in enumerate(fh, start=1):
            parts = line.rstrip("\n").split()
            if not parts:
                continue
            token, values = parts[0], parts[1:]
            if len(values) != expected_dim:
                problems.append((no, f"dimension mismatch: got {len(values)}, expected {expected_dim}"))
                continue
            try:
                vec = [float(v) for v in values]
            except ValueError:
                problems.append((no, "unparseable number"))
                continue
            if not all(np.isfinite(vec)):
                problems.append((no, "non-finite value"))
                continue
            if token in index:
                dups += 1
                continue
            index[token] = len(rows)
            rows.append(vec)
    if problems:
        raise CorpusParseError(path, problems)
    vectors = np.array(rows, float).reshape(len(rows), expected_dim)
    vectors.setflags(write=False)
    return EmbeddingTable(dim=expected_dim, index=index, vectors=vectors, duplicate_warnings=dups)


def save_embeddings(table, path):
    # repr() gives the shortest string that round-trips each float exactly
    with Path(path).open("w", encoding="utf-8") as fh:
        for token, i in table.index.items():
            fh.write(token + " " + " ".join(repr(float(v)) for v in table.vectors[i]) + "\n")


def pool_average(tokens, table):
    """Mean of the in-vocabulary token vectors; zeros when none are known."""
    rows = [table.index[t] for t in tokens if t in table.index]
    if not rows:
        return np.zeros(table.dim)
    return table.vectors[rows].mean(axis=0)


def generate_synthetic_embeddings(tokens, dim, seed):
    """Random Gaussian vectors (scale 0.5) for ``tokens``; stands in for GloVe in demos and tests."""
    rng = make_rng(seed)
    vecs = rng.normal(0.0, 0.5, size=(len(tokens), dim))
    return EmbeddingTable.from_dict(dict(zip(tokens, vecs)), dim=dim)
