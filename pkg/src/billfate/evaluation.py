"""Train/test splitting, results-table metrics, reports, ablation and feature importance."""

import hashlib
import json
import math
from dataclasses import dataclass, field, replace

import numpy as np
from scipy.stats import rankdata

from .errors import DataError
from .models import predict_proba, predict_stack
from .rng import derive_seed, make_rng

METRIC_COLUMNS = ("F1", "Precision", "Recall", "AUC", "Brier Loss", "Accuracy")
CLASS_NAMES = {1: "enacted", 0: "not_enacted"}


def _round_half_up(x):
    return int(math.floor(x + 0.5))


def split_70_30(labels, seed, stratified=True, ratio=0.7):
    """Index arrays ``(train, test)``; train size is ``round(ratio * n)``.

    Stratified mode gives each class ``floor(ratio * n_c)`` training rows and
    hands the leftover slots to the classes with the largest remainders, so
    each class is within one row of its exact share.
    """
    y = np.asarray(labels)
    n = len(y)
    if n < 10:
        raise DataError("need at least 10 records to split")
    if not 0.0 < ratio < 1.0:
        raise DataError("split ratio must lie in (0, 1)")
    n_train = _round_half_up(ratio * n)
    rng = make_rng(seed)
    if not stratified:
        perm = rng.permutation(n)
        return np.sort(perm[:n_train]), np.sort(perm[n_train:])
    classes = [0, 1]
    members = [np.flatnonzero(y == c) for c in classes]
    for c, idx in zip(classes, members):
        if len(idx) < 2:
            raise DataError(f"class {c} has fewer than 2 records; cannot stratify")
    if sum(len(m) for m in members) != n:
        raise DataError("stratified split needs 0/1 labels")
    exact = [ratio * len(m) for m in members]
    take = [int(math.floor(e)) for e in exact]
    leftover = n_train - sum(take)
    order = sorted(range(len(classes)), key=lambda i: (-(exact[i] - take[i]), i))
    for i in order[:leftover]:
        take[i] += 1
    train, test = [], []
    for idx, t in zip(members, take):
        idx = rng.permutation(idx)
        train.append(idx[:t])
        test.append(idx[t:])
    return np.sort(np.concatenate(train)), np.sort(np.concatenate(test))


# -- metrics ----------------------------------------------------------------------

def _ratio(num, den, flags, name):
    if den == 0:
        flags.append(name)
        return 0.0
    return num / den


def classification_metrics(y_true, y_pred):
    """Per-class precision/recall/F1, macro and support-weighted averages, accuracy, confusion.

    Any 0/0 ratio is reported as 0 and named in ``zero_division``.
    """
    t = np.asarray(y_true).astype(int)
    p = np.asarray(y_pred).astype(int)
    if len(t) == 0:
        raise DataError("no samples")
    if len(t) != len(p):
        raise DataError("y_true and y_pred differ in length")
    if not (set(np.unique(t)) | set(np.unique(p))) <= {0, 1}:
        raise DataError("labels and predictions must be 0/1")
    tp = int(np.sum((t == 1) & (p == 1)))
    tn = int(np.sum((t == 0) & (p == 0)))
    fp = int(np.sum((t == 0) & (p == 1)))
    fn = int(np.sum((t == 1) & (p == 0)))
    flags = []
    per_class = {}
    for c, (ctp, cfp, cfn) in ((1, (tp, fp, fn)), (0, (tn, fn, fp))):
        name = CLASS_NAMES[c]
        prec = _ratio(ctp, ctp + cfp, flags, f"precision[{name}]")
        rec = _ratio(ctp, ctp + cfn, flags, f"recall[{name}]")
        f1 = _ratio(2 * prec * rec, prec + rec, flags, f"f1[{name}]")
        per_class[name] = {"precision": prec, "recall": rec, "f1": f1, "support": ctp + cfn}
    n = len(t)
    macro = {m: (per_class["enacted"][m] + per_class["not_enacted"][m]) / 2
             for m in ("precision", "recall", "f1")}
    weighted = {m: (per_class["enacted"][m] * per_class["enacted"]["support"]
                    + per_class["not_enacted"][m] * per_class["not_enacted"]["support"]) / n
                for m in ("precision", "recall", "f1")}
    return {
        "per_class": per_class,
        "macro": macro,
        "weighted": weighted,
        "accuracy": (tp + tn) / n,
        "confusion": {"tp": tp, "fp": fp, "tn": tn, "fn": fn},
        "zero_division": flags,
    }


def roc_auc(y_true, scores):
    """Mann-Whitney AUC with ties counted as one half (midrank sum)."""
    y = np.asarray(y_true)
    s = np.asarray(scores, float)
    n_pos = int(np.sum(y == 1))
    n_neg = len(y) - n_pos
    if n_pos == 0 or n_neg == 0:
        raise DataError("AUC needs both classes")
    ranks = rankdata(s)  # average ranks for ties
    u = float(np.sum(ranks[y == 1])) - n_pos * (n_pos + 1) / 2.0
    return u / (n_pos * n_neg)


def brier(y_true, prob):
    p = np.asarray(prob, float)
    if np.any((p < 0) | (p > 1)) or not np.all(np.isfinite(p)):
        raise DataError("probabilities must lie in [0, 1]")
    return float(np.mean((p - np.asarray(y_true, float)) ** 2))


# -- reports ----------------------------------------------------------------------

def config_digest(config):
    blob = json.dumps(config, sort_keys=True, separators=(",", ":")).encode()
    return hashlib.sha256(blob).hexdigest()


@dataclass
class EvaluationReport:
    model_id: str
    per_class: dict
    macro: dict
    weighted: dict
    auc: float
    brier: float
    accuracy: float
    confusion: dict
    n_test: int
    threshold: float = 0.5
    zero_division: list = field(default_factory=list)
    config_digest: str = ""

    def row(self):
        """Values for the results-table columns, in ``METRIC_COLUMNS`` order."""
        return (self.macro["f1"], self.macro["precision"], self.macro["recall"],
                self.auc, self.brier, self.accuracy)

    def to_dict(self):
        return {
            "model_id": self.model_id, "n_test": self.n_test, "threshold": self.threshold,
            "macro": self.macro, "weighted": self.weighted, "per_class": self.per_class,
            "auc": self.auc, "brier": self.brier, "accuracy": self.accuracy,
            "confusion": self.confusion, "zero_division": list(self.zero_division),
            "config_digest": self.config_digest,
        }

    @classmethod
    def from_dict(cls, d):
        return cls(**d)

    def to_json(self):
        return json.dumps(self.to_dict(), indent=2)


def evaluate_scores(model_id, y_true, prob, threshold=0.5, digest=""):
    """Report from labels and probabilities; ``p >= threshold`` predicts enacted."""
    y = np.asarray(y_true).astype(int)
    prob = np.asarray(prob, float)
    pred = (prob >= threshold).astype(int)
    m = classification_metrics(y, pred)
    return EvaluationReport(
        model_id=model_id, per_class=m["per_class"], macro=m["macro"], weighted=m["weighted"],
        auc=roc_auc(y, prob), brier=brier(y, prob), accuracy=m["accuracy"],
        confusion=m["confusion"], n_test=len(y), threshold=threshold,
        zero_division=m["zero_division"], config_digest=digest)


def model_probabilities(model, X):
    """Probabilities from a LinearModel, a StackModel or any callable ``X -> p``."""
    if callable(model):
        return np.asarray(model(X), float)
    if hasattr(model, "meta"):
        return np.asarray(predict_stack(model, X), float)
    return np.asarray(predict_proba(model, X), float)


def evaluate(model, test, threshold=0.5, model_id="model", digest=""):
    if test.labels is None or test.n == 0:
        raise DataError("evaluation needs a non-empty labelled test matrix")
    width = getattr(model, "width", None)
    if width is not None and width != test.width:
        raise DataError(f"model width {width} does not match test width {test.width}")
    return evaluate_scores(model_id, test.labels, model_probabilities(model, test.values),
                           threshold, digest)


def format_table(reports):
    """Aligned plain-text table: Model plus the six metric columns, then per-class F1."""
    names = [r.model_id for r in reports]
    w = max([len("Model")] + [len(n) for n in names])
    colw = [max(len(c), 6) for c in METRIC_COLUMNS]
    head = "Model".ljust(w) + "  " + "  ".join(c.rjust(cw) for c, cw in zip(METRIC_COLUMNS, colw))
    lines = [head, "-" * len(head)]
    for r in reports:
        lines.append(r.model_id.ljust(w) + "  " + "  ".join(
            f"{v:.4f}".rjust(cw) for v, cw in zip(r.row(), colw)))
    lines.append("")
    lines.append("Per-class F1".ljust(w) + "  " + "not_enacted".rjust(11) + "  " + "enacted".rjust(8))
    for r in reports:
        lines.append(r.model_id.ljust(w) + "  "
                     + f"{r.per_class['not_enacted']['f1']:.4f}".rjust(11) + "  "
                     + f"{r.per_class['enacted']['f1']:.4f}".rjust(8))
    return "\n".join(lines) + "\n"


def report_deltas(with_report, without_report):
    """``with - without`` for every headline and per-class metric."""
    out = dict(zip(METRIC_COLUMNS, (a - b for a, b in zip(with_report.row(), without_report.row()))))
    for cls in ("enacted", "not_enacted"):
        for m in ("precision", "recall", "f1"):
            out[f"{m}[{cls}]"] = with_report.per_class[cls][m] - without_report.per_class[cls][m]
    return out


# -- feature importance -----------------------------------------------------------

def _macro_f1(y, prob, threshold=0.5):
    return classification_metrics(y, (prob >= threshold).astype(int))["macro"]["f1"]


METRICS = {
    "macro_f1": _macro_f1,
    "auc": lambda y, p: roc_auc(y, p),
    "neg_brier": lambda y, p: -brier(y, p),
}


@dataclass(frozen=True)
class GroupImportance:
    group: str
    mean: float
    std: float


def permutation_importance(model, test, schema=None, metric="macro_f1", n_repeats=10, seed=0,
                           groups=None):
    """Drop in ``metric`` when a group's columns are shuffled together across rows.

    Each repeat draws one row permutation per group from a stream derived
    from ``(seed, repeat, group)``; all columns of the group move together.
    Returns groups sorted by decreasing mean importance (ties keep schema
    order) and the baseline score.
    """
    schema = schema or test.schema
    if schema.width != test.width:
        raise DataError(f"schema width {schema.width} does not match matrix width {test.width}")
    schema.validate()
    if test.labels is None:
        raise DataError("importance needs labels")
    score = METRICS[metric] if isinstance(metric, str) else metric
    X, y = test.values, test.labels
    base = score(y, model_probabilities(model, X))
    names = groups or schema.names
    out = []
    for g in names:
        cols = schema.columns(g) if isinstance(g, str) else np.concatenate([schema.columns(x) for x in g])
        label = g if isinstance(g, str) else "+".join(g)
        drops = []
        for r in range(n_repeats):
            perm = make_rng(derive_seed(seed, r, label)).permutation(len(y))
            Xp = X.copy()
            Xp[:, cols] = X[perm][:, cols]
            drops.append(base - score(y, model_probabilities(model, Xp)))
        out.append(GroupImportance(label, float(np.mean(drops)), float(np.std(drops))))
    order = sorted(range(len(out)), key=lambda i: (-out[i].mean, i))
    return [out[i] for i in order], base


def weight_mass(model, schema):
    """Sum of |weight| per group for each linear base model, plus the meta weights."""
    bases = {"logistic": model.lr, "svm": model.svm} if hasattr(model, "meta") else {model.kind: model}
    out = {}
    for name, m in bases.items():
        out[name] = {g: float(np.abs(m.weights[s:e]).sum()) for g, s, e in schema.groups}
    if hasattr(model, "meta"):
        out["meta"] = {"logistic": float(model.meta.weights[0]), "svm": float(model.meta.weights[1]),
                       "bias": float(model.meta.bias)}
    return out
