"""Feature groups F1-F11, bag-of-words counts and train-fitted standardization.

Column layout for the default ``engineered+wordvec`` representation with
embedding dimension ``d`` (width ``16 + 2d``)::

    F1  month (1)            F7  title length in tokens (1)
    F2  category one-hot (8) F8  mean title word vector (d)
    F3  year introduced (1)  F9  reference_year - year (1)
    F4  body length (1)      F10 election-year flag (1)
    F5  top-sponsor flag (1) F11 mean body word vector (d)
    F6  legislator flag (1)

``engineered`` drops F8 and F11; ``bow`` replaces them with one block of
token counts named ``BOW``.
"""

import re
from collections import Counter
from dataclasses import dataclass, field, replace

import numpy as np

from .corpus import CATEGORIES
from .embeddings import pool_average, tokenize
from .errors import DataError

REPRESENTATIONS = ("engineered", "engineered+wordvec", "bow")

GROUP_TITLES = {
    "F1": "Month", "F2": "Label", "F3": "Year Introduced", "F4": "Text Length",
    "F5": "Sponsor (top sponsor or not)", "F6": "Sponsor2 (legislator or executive)",
    "F7": "Title Length", "F8": "Title Word Vector", "F9": "Year Difference",
    "F10": "Election Year or Not", "F11": "Text Word Vectors", "BOW": "Bag of Words",
}
# z-scored columns; everything else (one-hot, flags, embeddings) passes through
SCALED_GROUPS = ("F1", "F3", "F4", "F7", "F9", "BOW")


@dataclass(frozen=True)
class FeatureConfig:
    election_years: tuple = (2013, 2017)
    reference_year: int = 2019
    top_sponsor: str = "aden duale"
    bow_min_freq: int = 2
    bow_max_vocab: int = 5000


@dataclass(frozen=True)
class FeatureSchema:
    groups: tuple  # ((name, start, stop), ...)

    @property
    def width(self):
        return self.groups[-1][2] if self.groups else 0

    @property
    def names(self):
        return [g[0] for g in self.groups]

    def span(self, name):
        for g, start, stop in self.groups:
            if g == name:
                return start, stop
        raise KeyError(name)

    def columns(self, name):
        start, stop = self.span(name)
        return np.arange(start, stop)

    def scaled_columns(self):
        cols = [self.columns(g) for g in self.names if g in SCALED_GROUPS]
        return np.concatenate(cols) if cols else np.array([], int)

    def validate(self):
        pos = 0
        for name, start, stop in self.groups:
            if start != pos or stop <= start:
                raise DataError(f"group {name} span [{start}, {stop}) is not contiguous")
            pos = stop
        if len(set(self.names)) != len(self.names):
            raise DataError("duplicate group names")

    def to_list(self):
        return [[n, s, e] for n, s, e in self.groups]

    @classmethod
    def from_list(cls, items):
        schema = cls(tuple((str(n), int(s), int(e)) for n, s, e in items))
        schema.validate()
        return schema


def _build_schema(sizes):
    groups, pos = [], 0
    for name, size in sizes:
        groups.append((name, pos, pos + size))
        pos += size
    return FeatureSchema(tuple(groups))


def engineered_schema(dim=100, wordvec=True):
    sizes = [("F1", 1), ("F2", 8), ("F3", 1), ("F4", 1), ("F5", 1), ("F6", 1), ("F7", 1)]
    if wordvec:
        sizes.append(("F8", dim))
    sizes += [("F9", 1), ("F10", 1)]
    if wordvec:
        sizes.append(("F11", dim))
    return _build_schema(sizes)


def bow_schema(vocab_size):
    return _build_schema([(n, e - s) for n, s, e in engineered_schema(wordvec=False).groups]
                         + [("BOW", vocab_size)])


@dataclass(frozen=True)
class FeatureMatrix:
    values: np.ndarray
    schema: FeatureSchema
    labels: np.ndarray = None
    ids: tuple = field(default=None, compare=False)

    def __post_init__(self):
        v = self.values
        if v.ndim != 2 or v.shape[1] != self.schema.width:
            raise DataError(f"matrix shape {v.shape} does not match schema width {self.schema.width}")
        if not np.all(np.isfinite(v)):
            raise DataError("feature matrix contains NaN or infinite values")
        if self.labels is not None and len(self.labels) != v.shape[0]:
            raise DataError("labels length does not match row count")

    @property
    def n(self):
        return self.values.shape[0]

    @property
    def width(self):
        return self.values.shape[1]

    def subset(self, rows):
        rows = np.asarray(rows)
        return FeatureMatrix(
            self.values[rows], self.schema,
            None if self.labels is None else self.labels[rows],
            None if self.ids is None else tuple(self.ids[i] for i in rows))


def normalize_name(name):
    return re.sub(r"\s+", " ", name.strip().lower())


def scalar_features(record, config, title_tokens=None, body_tokens=None):
    """The 16 non-embedding columns, split into the part before F8 and the part after."""
    if title_tokens is None:
        title_tokens = tokenize(record.title)
    if body_tokens is None:
        body_tokens = tokenize(record.body)
    onehot = [0.0] * 8
    onehot[CATEGORIES.index(record.category)] = 1.0
    head = [float(record.month), *onehot, float(record.year), float(len(body_tokens)),
            float(normalize_name(record.sponsor_name) == normalize_name(config.top_sponsor)),
            float(record.sponsor_kind == "legislator"), float(len(title_tokens))]
    tail = [float(config.reference_year - record.year),
            float(record.year in config.election_years)]
    return head, tail


def featurize(record, table, config, wordvec=True):
    """Feature vector for one bill. ``table`` may be None when ``wordvec`` is False."""
    title_tokens, body_tokens = tokenize(record.title), tokenize(record.body)
    head, tail = scalar_features(record, config, title_tokens, body_tokens)
    if not wordvec:
        return np.array(head + tail)
    title = pool_average(title_tokens, table)
    body = pool_average(body_tokens, table)
    return np.concatenate([head, title, tail, body])


def _labels(records):
    labels = [r.label for r in records]
    if any(l is None for l in labels):
        bad = [r.id for r in records if r.label is None][:5]
        raise DataError(f"outcome unknown for bill(s) {', '.join(bad)}; cannot build labels")
    return np.array(labels, dtype=np.int64)


def featurize_corpus(records, table, config, wordvec=True, with_labels=True):
    if not records:
        raise DataError("cannot featurize an empty record list")
    dim = table.dim if (wordvec and table is not None) else 0
    if wordvec and table is None:
        raise DataError("word-vector features need an embedding table")
    schema = engineered_schema(dim, wordvec=wordvec)
    values = np.vstack([featurize(r, table, config, wordvec) for r in records])
    labels = _labels(records) if with_labels else None
    return FeatureMatrix(values, schema, labels, tuple(r.id for r in records))


# -- bag of words ---------------------------------------------------------------

def _doc_tokens(record):
    return tokenize(record.title) + tokenize(record.body)


def build_vocabulary(records, min_freq=2, max_vocab=5000):
    """Tokens with at least ``min_freq`` occurrences, the ``max_vocab`` most frequent, sorted."""
    counts = Counter()
    for r in records:
        counts.update(_doc_tokens(r))
    kept = [(t, c) for t, c in counts.items() if c >= min_freq]
    kept.sort(key=lambda tc: (-tc[1], tc[0]))
    vocab = sorted(t for t, _ in kept[:max_vocab])
    if not vocab:
        raise DataError("bag-of-words vocabulary is empty (check min_freq)")
    return vocab


def bow_counts(records, vocab):
    pos = {t: i for i, t in enumerate(vocab)}
    out = np.zeros((len(records), len(vocab)))
    for row, r in enumerate(records):
        for t in _doc_tokens(r):
            j = pos.get(t)
            if j is not None:
                out[row, j] += 1
    return out


def featurize_bow(train_records, test_records, config):
    """Token-count matrices for train and test over a vocabulary built from train only."""
    vocab = build_vocabulary(train_records, config.bow_min_freq, config.bow_max_vocab)
    schema = _build_schema([("BOW", len(vocab))])

    def matrix(records):
        labels = _labels(records) if records and all(r.label is not None for r in records) else None
        return FeatureMatrix(bow_counts(records, vocab).reshape(len(records), len(vocab)),
                             schema, labels, tuple(r.id for r in records))

    return matrix(train_records), matrix(test_records), vocab


def featurize_with_bow(records, vocab, config, with_labels=True):
    """Scalar engineered features followed by the BOW block over a fixed vocabulary."""
    if not records:
        raise DataError("cannot featurize an empty record list")
    scalars = np.vstack([featurize(r, None, config, wordvec=False) for r in records])
    values = np.hstack([scalars, bow_counts(records, vocab)])
    labels = _labels(records) if with_labels else None
    return FeatureMatrix(values, bow_schema(len(vocab)), labels, tuple(r.id for r in records))


# -- standardization ------------------------------------------------------------

@dataclass(frozen=True)
class Scaler:
    mean: np.ndarray
    std: np.ndarray

    @property
    def width(self):
        return len(self.mean)

    def to_dict(self):
        return {"mean": [float(x) for x in self.mean], "std": [float(x) for x in self.std]}

    @classmethod
    def from_dict(cls, d):
        return cls(np.array(d["mean"], float), np.array(d["std"], float))


def fit_scaler(train):
    """Population mean/std on the scaled groups; identity (0, 1) elsewhere."""
    if train.n == 0:
        raise DataError("cannot fit a scaler on an empty matrix")
    mean = np.zeros(train.width)
    std = np.ones(train.width)
    cols = train.schema.scaled_columns()
    if cols.size:
        sub = train.values[:, cols]
        mean[cols] = sub.mean(axis=0)
        s = sub.std(axis=0)
        std[cols] = np.where(s > 0, s, 1.0)
    return Scaler(mean, std)


def apply_scaler(scaler, matrix):
    if scaler.width != matrix.width:
        raise DataError(f"scaler width {scaler.width} does not match matrix width {matrix.width}")
    return replace(matrix, values=(matrix.values - scaler.mean) / scaler.std)
