"""End-to-end pipeline: split -> featurize -> fit scaler -> scale -> SMOTE -> stack.

The fitted pieces (schema, scaler, BOW vocabulary, stack) are bundled in a
:class:`TrainedPipeline`, which is what gets persisted as a model file.
"""

import hashlib
import json
import os
import tempfile
from contextlib import contextmanager
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from . import config as cfgmod
from .embeddings import load_embeddings
from .errors import DataError, IntegrityError, StageError
from .evaluation import evaluate, report_deltas, split_70_30
from .features import (FeatureSchema, Scaler, apply_scaler, build_vocabulary, featurize_corpus,
                       featurize_with_bow, fit_scaler)
from .models import StackModel, predict_stack, train_stack
from .resampling import smote

FORMAT = "billfate-model"
SCHEMA_VERSION = 1
MODEL_NAMES = ("Logistic Regression", "Support Vector Machine", "Stacked Ensemble")


@contextmanager
def stage(name):
    """Re-raise any failure inside the block as a StageError naming the stage."""
    try:
        yield
    except StageError:
        raise
    except Exception as exc:
        raise StageError(name, exc) from exc


def needs_embeddings(cfg):
    return cfg["representation"] == "engineered+wordvec"


def load_table(cfg):
    if not needs_embeddings(cfg):
        return None
    path = cfg["embeddings"]["path"]
    if not Path(path).exists():
        raise DataError(f"embeddings file not found: {path}")
    return load_embeddings(path, int(cfg["embeddings"]["dim"]))


def labels_of(records):
    unknown = [r.id for r in records if r.label is None]
    if unknown:
        raise DataError(f"{len(unknown)} record(s) with unknown outcome cannot be used for training, "
                        f"e.g. {unknown[0]}")
    return np.array([r.label for r in records], dtype=np.int64)


def split_records(records, cfg):
    y = labels_of(records)
    tr, te = split_70_30(y, cfg["seeds"]["split"], stratified=bool(cfg["split"]["stratified"]),
                         ratio=float(cfg["split"]["ratio"]))
    return [records[i] for i in tr], [records[i] for i in te]


def _digest(obj):
    return hashlib.sha256(json.dumps(obj, sort_keys=True, separators=(",", ":")).encode()).hexdigest()


@dataclass
class TrainedPipeline:
    config: dict  # portable effective config
    schema: FeatureSchema
    scaler: Scaler
    stack: StackModel
    vocabulary: list = None
    train_predictions: dict = field(default_factory=dict)

    @property
    def representation(self):
        return self.config["representation"]

    def raw_features(self, records, table, with_labels=True):
        fc = cfgmod.feature_config(self.config)
        if self.representation == "bow":
            m = featurize_with_bow(records, self.vocabulary, fc, with_labels)
        else:
            m = featurize_corpus(records, table, fc, wordvec=self.representation == "engineered+wordvec",
                                 with_labels=with_labels)
        if m.schema != self.schema:
            raise IntegrityError("feature schema of the input does not match the model's schema")
        return m

    def features(self, records, table, with_labels=True):
        return apply_scaler(self.scaler, self.raw_features(records, table, with_labels))

    def models(self):
        """(name, predictor) for the three results-table rows."""
        return [(MODEL_NAMES[0], self.stack.lr), (MODEL_NAMES[1], self.stack.svm),
                (MODEL_NAMES[2], self.stack)]

    def predict(self, matrix):
        return np.asarray(predict_stack(self.stack, matrix.values), float)

    # persistence ---------------------------------------------------------------

    def data_digest(self):
        return _digest(cfgmod.data_view(self.config))

    def to_dict(self):
        body = {
            "format": FORMAT,
            "schema_version": SCHEMA_VERSION,
            "representation": self.representation,
            "feature_schema": self.schema.to_list(),
            "schema_digest": _digest([self.schema.to_list(), self.scaler.to_dict()]),
            "scaler": self.scaler.to_dict(),
            "bow_vocabulary": self.vocabulary,
            "stack": self.stack.to_dict(),
            "seeds": self.config["seeds"],
            "config": self.config,
            "config_digest": _digest(self.config),
            "data_digest": self.data_digest(),
            "train_predictions": self.train_predictions,
        }
        body["digest"] = _digest(body)
        return body

    def dumps(self):
        return json.dumps(self.to_dict(), indent=1, ensure_ascii=False) + "\n"

    def save(self, path):
        atomic_write(path, self.dumps())

    @classmethod
    def from_dict(cls, d):
        if d.get("format") != FORMAT:
            raise IntegrityError("not a billfate model file")
        if d.get("schema_version") != SCHEMA_VERSION:
            raise IntegrityError(f"unsupported model schema version {d.get('schema_version')}")
        body = {k: v for k, v in d.items() if k != "digest"}
        if d.get("digest") != _digest(body):
            raise IntegrityError("model file digest mismatch (file altered or corrupted)")
        schema = FeatureSchema.from_list(d["feature_schema"])
        scaler = Scaler.from_dict(d["scaler"])
        if _digest([schema.to_list(), scaler.to_dict()]) != d["schema_digest"]:
            raise IntegrityError("schema digest mismatch")
        return cls(config=d["config"], schema=schema, scaler=scaler,
                   stack=StackModel.from_dict(d["stack"]), vocabulary=d["bow_vocabulary"],
                   train_predictions=d["train_predictions"])

    @classmethod
    def load(cls, path):
        try:
            text = Path(path).read_text(encoding="utf-8")
        except FileNotFoundError:
            raise IntegrityError(f"model file not found: {path}") from None
        try:
            d = json.loads(text)
        except json.JSONDecodeError as exc:
            raise IntegrityError(f"model file {path} is not valid JSON ({exc.msg}); truncated?") from None
        try:
            return cls.from_dict(d)
        except (KeyError, TypeError, ValueError) as exc:
            raise IntegrityError(f"model file {path} is malformed: {exc}") from None


def atomic_write(path, text):
    """Write via a temporary file in the same directory; nothing is left behind on failure."""
    path = Path(path)
    fd, tmp = tempfile.mkstemp(dir=path.parent or ".", prefix=f".{path.name}.", suffix=".tmp")
    try:
        with os.fdopen(fd, "w", encoding="utf-8", newline="") as fh:
            fh.write(text)
        os.replace(tmp, path)
    except BaseException:
        if os.path.exists(tmp):
            os.unlink(tmp)
        raise


def fit_stack(train, cfg, use_smote=True):
    """Resample (optionally) and train the stack on an already scaled matrix."""
    with stage("smote"):
        resampled = smote(train, cfgmod.smote_config(cfg)) if use_smote else train
    with stage("train"):
        model = train_stack(resampled.values, resampled.labels, k_folds=int(cfg["stack"]["folds"]),
                            lr_hyper=cfgmod.hyper(cfg, "logistic"), svm_hyper=cfgmod.hyper(cfg, "svm"),
                            meta_hyper=cfgmod.hyper(cfg, "meta"), seed=cfg["seeds"]["stack"])
    return model, resampled


def prepare(train_records, test_records, cfg, table):
    """Raw train/test matrices, plus the BOW vocabulary for the bow representation."""
    fc = cfgmod.feature_config(cfg)
    rep = cfg["representation"]
    with stage("featurize"):
        if rep == "bow":
            vocab = build_vocabulary(train_records, fc.bow_min_freq, fc.bow_max_vocab)
            return (featurize_with_bow(train_records, vocab, fc),
                    featurize_with_bow(test_records, vocab, fc) if test_records else None, vocab)
        wordvec = rep == "engineered+wordvec"
        return (featurize_corpus(train_records, table, fc, wordvec=wordvec),
                featurize_corpus(test_records, table, fc, wordvec=wordvec) if test_records else None,
                None)


def train_pipeline(records, cfg, table=None):
    """Run the full training pipeline; returns (pipeline, scaled test matrix)."""
    with stage("split"):
        train_records, test_records = split_records(records, cfg)
    raw_train, raw_test, vocab = prepare(train_records, test_records, cfg, table)
    with stage("scale"):
        scaler = fit_scaler(raw_train)
        train = apply_scaler(scaler, raw_train)
        test = apply_scaler(scaler, raw_test)
    model, _ = fit_stack(train, cfg, use_smote=bool(cfg["smote"]["enabled"]))
    preds = predict_stack(model, train.values)
    pipe = TrainedPipeline(config=cfgmod.portable(cfg), schema=raw_train.schema, scaler=scaler,
                           stack=model, vocabulary=vocab,
                           train_predictions={i: float(p) for i, p in zip(train.ids, preds)})
    return pipe, test


def evaluate_pipeline(pipe, test, threshold=0.5, digest=""):
    return [evaluate(m, test, threshold, model_id=name, digest=digest) for name, m in pipe.models()]


def ablation_oversampling(train, test, cfg, arms=(True, False)):
    """Train the stack with and without SMOTE on the same scaled split.

    ``arms`` sets the SMOTE flag of each side; ``(False, False)`` is a null
    comparison whose deltas must all be zero.

    Returns ``{"with_smote": [reports], "without_smote": [reports], "deltas": {model: {...}}}``
    where deltas are with minus without.
    """
    digest = _digest(cfgmod.portable(cfg))
    threshold = float(cfg["threshold"])
    out = {}
    for key, flag in zip(("with_smote", "without_smote"), arms):
        model, _ = fit_stack(train, cfg, use_smote=flag)
        out[key] = [evaluate(m, test, threshold, model_id=name, digest=digest)
                    for name, m in zip(MODEL_NAMES, (model.lr, model.svm, model))]
    out["deltas"] = {a.model_id: report_deltas(a, b) for a, b in zip(out["with_smote"], out["without_smote"])}
    return out
