"""Logistic regression and linear SVM trained from zero, Platt scaling, and stacking.

Both learners minimise a mean loss plus ``(l2_lambda / 2) * ||w||^2``; the
bias is not penalised. Emitted probabilities go through :func:`sigmoid`,
which clamps its input to [-30, 30] so results stay strictly inside (0, 1).
"""

from dataclasses import asdict, dataclass, field

import numpy as np
from scipy.special import expit

from .errors import DataError, NumericError
from .rng import derive_seed, make_rng

CLAMP = 30.0


def sigmoid(z):
    return expit(np.clip(z, -CLAMP, CLAMP))


@dataclass(frozen=True)
class Hyper:
    learning_rate: float = 0.1
    l2_lambda: float = 0.01
    max_iters: int = 5000
    tolerance: float = 1e-7
    seed: int = 0
    batch_size: int = None  # SVM only; None = full batch

    @classmethod
    def from_dict(cls, d):
        unknown = set(d) - set(cls.__dataclass_fields__)
        if unknown:
            raise DataError(f"unknown hyperparameter(s): {', '.join(sorted(unknown))}")
        return cls(**d)


@dataclass
class LinearModel:
    kind: str
    weights: np.ndarray
    bias: float
    hyper: Hyper
    final_loss: float
    n_iter: int
    calibration: tuple = None  # (A, B) for svm
    trace: list = field(default=None, repr=False, compare=False)

    @property
    def width(self):
        return len(self.weights)

    def to_dict(self):
        return {
            "kind": self.kind,
            "weights": [float(x) for x in self.weights],
            "bias": float(self.bias),
            "calibration": None if self.calibration is None else [float(c) for c in self.calibration],
            "hyper": asdict(self.hyper),
            "final_loss": float(self.final_loss),
            "n_iter": int(self.n_iter),
        }

    @classmethod
    def from_dict(cls, d):
        cal = d.get("calibration")
        return cls(kind=d["kind"], weights=np.array(d["weights"], float), bias=float(d["bias"]),
                   hyper=Hyper.from_dict(d["hyper"]), final_loss=float(d["final_loss"]),
                   n_iter=int(d["n_iter"]), calibration=None if cal is None else tuple(cal))


def _check_xy(X, y):
    X = np.asarray(X, float)
    y = np.asarray(y)
    if X.ndim != 2 or len(X) != len(y):
        raise DataError("X must be 2-D with one label per row")
    if len(y) < 2:
        raise DataError("need at least 2 training rows")
    if not set(np.unique(y)) <= {0, 1}:
        raise DataError("labels must be 0/1")
    if len(np.unique(y)) < 2:
        raise DataError("training data contains a single class")
    return X, y.astype(float)


# -- logistic regression ----------------------------------------------------------

def logistic_objective(w, b, X, y, l2_lambda):
    z = X @ w + b
    return float(np.mean(np.logaddexp(0.0, z) - y * z) + 0.5 * l2_lambda * (w @ w))


def logistic_gradient(w, b, X, y, l2_lambda):
    r = expit(X @ w + b) - y
    return X.T @ r / len(y) + l2_lambda * w, float(np.mean(r))


def train_logistic(X, y, hyper=Hyper()):
    """Full-batch gradient descent from zero; stops when the objective changes by < tolerance."""
    X, y = _check_xy(X, y)
    n = len(y)
    lam, lr = hyper.l2_lambda, hyper.learning_rate
    XT = np.ascontiguousarray(X.T)
    w, b = np.zeros(X.shape[1]), 0.0
    z = np.zeros(n)
    r = np.empty(n)
    loss = float(np.sum(np.logaddexp(0.0, z) - y * z)) / n
    trace = [loss]
    it = 0
    with np.errstate(over="ignore", invalid="ignore"):
        for it in range(1, hyper.max_iters + 1):
            expit(z, out=r)
            r -= y
            w = (1.0 - lr * lam) * w - (lr / n) * (XT @ r)
            b -= lr * float(r.sum()) / n
            z = X @ w
            z += b
            new = (float(np.logaddexp(0.0, z).sum() - y @ z) / n + 0.5 * lam * float(w @ w))
            if not np.isfinite(new):
                raise NumericError(f"logistic loss became non-finite at iteration {it}; lower the learning rate")
            trace.append(new)
            done = abs(loss - new) < hyper.tolerance
            loss = new
            if done:
                break
    return LinearModel("logistic", w, b, hyper, loss, it, trace=trace)


# -- linear SVM -------------------------------------------------------------------

def svm_objective(w, b, X, s, l2_lambda):
    """Mean hinge loss for labels ``s`` in {-1, +1} plus the L2 term."""
    return float(np.mean(np.maximum(0.0, 1.0 - s * (X @ w + b))) + 0.5 * l2_lambda * (w @ w))


def svm_subgradient(w, b, X, s, l2_lambda):
    active = (s * (X @ w + b) < 1.0).astype(float)
    coef = -(active * s)
    return X.T @ coef / len(s) + l2_lambda * w, float(np.mean(coef))


def train_svm(X, y, hyper=Hyper()):
    """Hinge-loss subgradient descent from zero.

    Full-batch (default): a step that would raise the objective is halved
    until it does not; if 40 halvings fail the current point is returned.
    With ``hyper.batch_size`` set, runs epochs of minibatch steps over a
    seeded shuffle with step ``learning_rate / sqrt(epoch)``.
    """
    X, y = _check_xy(X, y)
    s = 2.0 * y - 1.0
    lam = hyper.l2_lambda
    w, b = np.zeros(X.shape[1]), 0.0
    obj = svm_objective(w, b, X, s, lam)
    trace = [obj]
    it = 0
    if hyper.batch_size is None:
        step = hyper.learning_rate
        for it in range(1, hyper.max_iters + 1):
            gw, gb = svm_subgradient(w, b, X, s, lam)
            for _ in range(40):
                w_new, b_new = w - step * gw, b - step * gb
                new = svm_objective(w_new, b_new, X, s, lam)
                if new <= obj:
                    break
                step *= 0.5
            else:
                break
            if not np.isfinite(new):
                raise NumericError(f"SVM objective became non-finite at iteration {it}")
            w, b = w_new, b_new
            trace.append(new)
            done = obj - new < hyper.tolerance
            obj = new
            step = min(hyper.learning_rate, 2.0 * step)
            if done:
                break
    else:
        rng = make_rng(hyper.seed)
        n, bs = len(s), hyper.batch_size
        for it in range(1, hyper.max_iters + 1):
            eta = hyper.learning_rate / np.sqrt(it)
            order = rng.permutation(n)
            for start in range(0, n, bs):
                idx = order[start:start + bs]
                gw, gb = svm_subgradient(w, b, X[idx], s[idx], lam)
                w, b = w - eta * gw, b - eta * gb
            new = svm_objective(w, b, X, s, lam)
            if not np.isfinite(new):
                raise NumericError(f"SVM objective became non-finite at epoch {it}")
            trace.append(new)
            done = abs(obj - new) < hyper.tolerance
            obj = new
            if done:
                break
    return LinearModel("svm", w, b, hyper, obj, it, trace=trace)


# -- Platt scaling ----------------------------------------------------------------

def platt_calibrate(margins, y, max_iter=100, tol=1e-5):
    """Fit ``p = sigmoid(A * margin + B)`` by Newton's method with backtracking.

    Targets are smoothed to ``(N+ + 1) / (N+ + 2)`` and ``1 / (N- + 2)``
    (Platt 1999; the Newton scheme follows Lin, Lin & Weng 2007).
    """
    m = np.asarray(margins, float)
    y = np.asarray(y)
    n_pos = int(np.sum(y == 1))
    n_neg = int(np.sum(y == 0))
    if n_pos == 0 or n_neg == 0:
        raise DataError("Platt scaling needs both classes")
    t = np.where(y == 1, (n_pos + 1.0) / (n_pos + 2.0), 1.0 / (n_neg + 2.0))

    def nll(A, B):
        f = A * m + B
        return float(np.sum(np.logaddexp(0.0, f) - t * f))

    A, B = 0.0, float(np.log((n_pos + 1.0) / (n_neg + 1.0)))
    fval = nll(A, B)
    sigma = 1e-12
    for it in range(max_iter):
        p = expit(A * m + B)
        d1 = p - t
        gA, gB = float(d1 @ m), float(d1.sum())
        if abs(gA) < tol and abs(gB) < tol:
            return A, B
        d2 = p * (1.0 - p)
        h11 = float(d2 @ (m * m)) + sigma
        h22 = float(d2.sum()) + sigma
        h21 = float(d2 @ m)
        det = h11 * h22 - h21 * h21
        dA = -(h22 * gA - h21 * gB) / det
        dB = -(-h21 * gA + h11 * gB) / det
        gd = gA * dA + gB * dB
        step = 1.0
        while step >= 1e-10:
            nA, nB = A + step * dA, B + step * dB
            nf = nll(nA, nB)
            if nf < fval + 1e-4 * step * gd:
                A, B, fval = nA, nB, nf
                break
            step /= 2.0
        else:
            raise NumericError(
                f"Platt line search failed at iteration {it}: A={A}, B={B}, grad=({gA:.3g}, {gB:.3g})")
    raise NumericError(f"Platt scaling did not converge in {max_iter} iterations: A={A}, B={B}")


# -- prediction -------------------------------------------------------------------

def _as_rows(model_width, x):
    x = np.asarray(x, float)
    single = x.ndim == 1
    X = x[None, :] if single else x
    if X.shape[1] != model_width:
        raise DataError(f"feature width {X.shape[1]} does not match model width {model_width}")
    return X, single


def decision_function(model, x):
    X, single = _as_rows(model.width, x)
    z = X @ model.weights + model.bias
    return float(z[0]) if single else z


def predict_proba(model, x):
    z = decision_function(model, x)
    if model.kind == "svm":
        if model.calibration is None:
            raise DataError("SVM has no calibration; use decision_function for raw margins")
        A, B = model.calibration
        z = A * np.asarray(z) + B
    p = sigmoid(z)
    return float(p) if np.ndim(p) == 0 else p


# -- stacking ---------------------------------------------------------------------

def stratified_folds(y, k, seed):
    """Fold id per row: each class is shuffled and dealt round-robin across ``k`` folds."""
    y = np.asarray(y)
    if k < 2:
        raise DataError("need at least 2 folds")
    rng = make_rng(seed)
    fold = np.empty(len(y), dtype=np.int64)
    offset = 0
    for c in (0, 1):
        idx = np.flatnonzero(y == c)
        if len(idx) < k:
            raise DataError(f"class {c} has {len(idx)} rows, fewer than {k} folds; reduce k")
        idx = rng.permutation(idx)
        fold[idx] = (np.arange(len(idx)) + offset) % k
        offset = (offset + len(idx)) % k
    return fold


@dataclass
class StackModel:
    lr: LinearModel
    svm: LinearModel
    meta: LinearModel
    folds: int
    seed: int

    @property
    def width(self):
        return self.lr.width

    def to_dict(self):
        return {"base": {"logistic": self.lr.to_dict(), "svm": self.svm.to_dict()},
                "meta": self.meta.to_dict(), "folds": self.folds, "seed": self.seed}

    @classmethod
    def from_dict(cls, d):
        return cls(LinearModel.from_dict(d["base"]["logistic"]), LinearModel.from_dict(d["base"]["svm"]),
                   LinearModel.from_dict(d["meta"]), int(d["folds"]), int(d["seed"]))


def out_of_fold(X, y, k, seed, lr_hyper=Hyper(), svm_hyper=Hyper()):
    """Out-of-fold logistic probabilities and raw SVM margins."""
    X, yf = _check_xy(X, y)
    fold = stratified_folds(y, k, derive_seed(seed, "folds"))
    p_lr = np.empty(len(y))
    margin = np.empty(len(y))
    for f in range(k):
        tr, te = fold != f, fold == f
        p_lr[te] = predict_proba(train_logistic(X[tr], yf[tr], lr_hyper), X[te])
        margin[te] = decision_function(train_svm(X[tr], yf[tr], svm_hyper), X[te])
    return p_lr, margin


def train_calibrated_svm(X, y, hyper=Hyper(), k_folds=5, seed=0):
    """SVM refit on all rows, calibrated by Platt scaling on out-of-fold margins."""
    X, yf = _check_xy(X, y)
    fold = stratified_folds(y, k_folds, derive_seed(seed, "folds"))
    margin = np.empty(len(y))
    for f in range(k_folds):
        tr, te = fold != f, fold == f
        margin[te] = decision_function(train_svm(X[tr], yf[tr], hyper), X[te])
    model = train_svm(X, yf, hyper)
    model.calibration = platt_calibrate(margin, y)
    return model


def train_stack(X, y, k_folds=5, lr_hyper=Hyper(), svm_hyper=Hyper(), meta_hyper=Hyper(), seed=0):
    """Logistic + calibrated SVM base learners under a logistic meta-learner.

    The meta-learner is trained on out-of-fold probabilities; the base
    learners are then refit on every row for inference.
    """
    y = np.asarray(y)
    if len(y) < 2 * k_folds:
        raise DataError(f"need at least {2 * k_folds} rows for {k_folds}-fold stacking")
    p_lr, margin = out_of_fold(X, y, k_folds, seed, lr_hyper, svm_hyper)
    A, B = platt_calibrate(margin, y)
    p_svm = sigmoid(A * margin + B)
    meta = train_logistic(np.column_stack([p_lr, p_svm]), y, meta_hyper)
    lr = train_logistic(X, y, lr_hyper)
    svm = train_svm(X, y, svm_hyper)
    svm.calibration = (A, B)
    return StackModel(lr, svm, meta, k_folds, seed)


def base_probabilities(model, x):
    return predict_proba(model.lr, x), predict_proba(model.svm, x)


def predict_stack(model, x):
    p_lr, p_svm = base_probabilities(model, x)
    return predict_proba(model.meta, np.column_stack([np.atleast_1d(p_lr), np.atleast_1d(p_svm)])
                         if np.ndim(p_lr) else np.array([p_lr, p_svm]))
