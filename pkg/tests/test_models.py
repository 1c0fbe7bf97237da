import json

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from billfate.errors import DataError, NumericError
from billfate.evaluation import roc_auc
from billfate.models import (Hyper, LinearModel, StackModel, decision_function, platt_calibrate, predict_proba,
                             predict_stack, sigmoid, stratified_folds, svm_objective, train_logistic, train_stack,
                             train_svm)

from oracles import gradient_error


def linear_data(seed, n=200, d=5, noise=0.0):
    rng = np.random.default_rng(seed)
    X = rng.normal(size=(n, d))
    w = rng.normal(size=d)
    z = X @ w + 0.3
    if noise:
        z = z + rng.normal(scale=noise, size=n)
    return X, (z > 0).astype(np.int64)


# -- logistic ---------------------------------------------------------------------

def test_logistic_symmetric_data():
    m = train_logistic([[1.0], [-1.0]], [1, 0], Hyper(max_iters=20000, tolerance=1e-14))
    assert abs(m.bias) < 1e-6
    assert abs(predict_proba(m, [0.0]) - 0.5) < 1e-6


def test_logistic_separable_1d():
    X = np.array([[-3.0], [-2.0], [-1.5], [-0.5], [0.5], [1.0], [2.0], [3.0]])
    y = np.array([0, 0, 0, 0, 1, 1, 1, 1])
    m = train_logistic(X, y, Hyper(l2_lambda=1e-3))
    assert np.array_equal((predict_proba(m, X) >= 0.5).astype(int), y)
    assert m.n_iter > 0 and np.isfinite(m.final_loss)


def test_gradient_matches_finite_differences():
    rng = np.random.default_rng(0)
    worst = 0.0
    for _ in range(100):
        X = rng.normal(size=(20, 10))
        y = rng.integers(0, 2, 20).astype(float)
        w, b = rng.normal(size=10), float(rng.normal())
        worst = max(worst, gradient_error(X, y, w, b, 0.01))
    assert worst < 1e-5


def test_logistic_loss_monotone():
    X, y = linear_data(3, noise=0.5)
    m = train_logistic(X, y)
    assert np.all(np.diff(m.trace) <= 1e-12)
    assert m.final_loss == m.trace[-1]


def test_logistic_errors():
    with pytest.raises(DataError):
        train_logistic([[1.0], [2.0]], [1, 1])
    with pytest.raises(DataError):
        train_logistic([[1.0]], [1])
    X, y = linear_data(0)
    with pytest.raises(NumericError):
        train_logistic(X * 1e200, y, Hyper(learning_rate=1e200))


# -- svm --------------------------------------------------------------------------

def test_svm_separable_1d():
    X = np.array([[-2.0], [2.0]])
    m = train_svm(X, [0, 1])
    assert np.sign(decision_function(m, X)).tolist() == [-1.0, 1.0]


def test_svm_identical_rows():
    m = train_svm(np.ones((6, 3)), [0, 1, 0, 1, 0, 1])
    assert np.isfinite(m.final_loss)
    assert np.allclose(m.weights, m.weights[0])
    assert abs(svm_objective(m.weights, m.bias, np.ones((6, 3)), np.array([-1.0, 1.0] * 3), 0.01) - m.final_loss) < 1e-12


def test_svm_objective_non_increasing():
    X, y = linear_data(4, noise=1.0)
    m = train_svm(X, y)
    assert np.all(np.diff(m.trace) <= 1e-12)


def test_svm_minibatch_is_seeded():
    X, y = linear_data(5)
    a = train_svm(X, y, Hyper(batch_size=16, max_iters=50, seed=1))
    b = train_svm(X, y, Hyper(batch_size=16, max_iters=50, seed=1))
    assert np.array_equal(a.weights, b.weights)
    assert np.mean((decision_function(a, X) > 0) == y) > 0.9


# -- platt ------------------------------------------------------------------------

def test_platt_ordered_margins_monotone():
    m = np.linspace(-3, 3, 20)
    y = (m > 0).astype(int)
    A, B = platt_calibrate(m, y)
    p = sigmoid(A * m + B)
    assert A > 0 and np.all(np.diff(p) > 0)


def test_platt_constant_margins():
    y = np.array([1, 0, 0, 0, 1, 0, 0, 0, 0, 0])
    A, B = platt_calibrate(np.zeros(10), y)
    n_pos, n_neg = 2, 8
    t = np.where(y == 1, (n_pos + 1) / (n_pos + 2), 1 / (n_neg + 2))
    assert abs(A) < 1e-8
    assert abs(sigmoid(B) - t.mean()) < 1e-6


def test_platt_sign_flip():
    rng = np.random.default_rng(0)
    y = rng.integers(0, 2, 60)
    m = rng.normal(size=60) + 1.2 * y
    A, B = platt_calibrate(m, y)
    A2, B2 = platt_calibrate(-m, y)
    assert abs(A + A2) < 1e-6 and abs(B - B2) < 1e-6
    assert np.allclose(sigmoid(A * m + B), sigmoid(A2 * -m + B2), atol=1e-8)


def test_platt_needs_both_classes():
    with pytest.raises(DataError):
        platt_calibrate([0.1, 0.2], [1, 1])


# -- predict_proba ----------------------------------------------------------------

def model(kind, w, b, cal=None):
    return LinearModel(kind, np.asarray(w, float), float(b), Hyper(), 0.0, 0, cal)


def test_zero_model_gives_half():
    m = model("logistic", [0, 0, 0], 0)
    assert np.all(predict_proba(m, np.random.default_rng(0).normal(size=(5, 3))) == 0.5)


def test_large_bias():
    assert predict_proba(model("logistic", [0.0], 20.0), [3.0]) > 0.999


def test_calibrated_svm_by_hand():
    m = model("svm", [0.5, -1.0], 0.25, cal=(-1.7, 0.3))
    x = np.array([2.0, 0.5])
    margin = 0.5 * 2.0 - 1.0 * 0.5 + 0.25
    assert predict_proba(m, x) == pytest.approx(1 / (1 + np.exp(-(-1.7 * margin + 0.3))), abs=1e-15)


def test_uncalibrated_svm_refuses_probabilities():
    m = model("svm", [1.0], 0.0)
    with pytest.raises(DataError):
        predict_proba(m, [1.0])
    assert decision_function(m, [2.0]) == 2.0


def test_width_mismatch():
    with pytest.raises(DataError):
        predict_proba(model("logistic", [1.0, 2.0], 0), [1.0])


def test_probabilities_strictly_inside():
    m = model("logistic", [1.0], 0.0)
    p = predict_proba(m, np.array([[-1e6], [1e6]]))
    assert 0.0 < p[0] < p[1] < 1.0


@settings(max_examples=50, deadline=None)
@given(st.integers(1, 6), st.floats(0.01, 100), st.integers(0, 2**32 - 1))
def test_affine_consistency(d, scale, seed):
    rng = np.random.default_rng(seed)
    w, b, x = rng.normal(size=d), float(rng.normal()), rng.normal(size=(4, d))
    a = decision_function(model("logistic", w, b), x)
    c = decision_function(model("logistic", w / scale, b), x * scale)
    assert np.allclose(a, c, rtol=1e-10, atol=1e-10)


# -- folds and stack --------------------------------------------------------------

def test_stratified_folds():
    y = np.array([1] * 7 + [0] * 23)
    f = stratified_folds(y, 5, seed=0)
    for k in range(5):
        assert 1 <= np.sum(y[f == k]) <= 2
        assert 5 <= np.sum(f == k) <= 7
    assert np.array_equal(f, stratified_folds(y, 5, seed=0))
    with pytest.raises(DataError):
        stratified_folds(np.array([1] * 3 + [0] * 10), 5, seed=0)


def test_stack_needs_rows():
    with pytest.raises(DataError):
        train_stack(np.zeros((6, 2)), [0, 1] * 3)


def test_meta_zero_weights_half():
    X, y = linear_data(1, n=60)
    s = train_stack(X, y, k_folds=3, seed=0)
    s.meta = model("logistic", [0.0, 0.0], 0.0)
    assert np.all(predict_stack(s, X) == 0.5)


def test_meta_dominated_by_logistic():
    X, y = linear_data(1, n=60)
    s = train_stack(X, y, k_folds=3, seed=0)
    s.meta = model("logistic", [10.0, 0.0], -5.0)
    p_lr = predict_proba(s.lr, X)
    out = predict_stack(s, X)
    order = np.argsort(p_lr)
    assert np.all(np.diff(out[order]) >= 0)


def test_predict_stack_by_hand():
    X, y = linear_data(2, n=80)
    s = StackModel.from_dict(json.loads(json.dumps(train_stack(X, y, seed=3).to_dict())))
    x = X[7]
    w, b = np.array(s.lr.to_dict()["weights"]), s.lr.bias
    p_lr = 1 / (1 + np.exp(-(x @ w + b)))
    A, B = s.svm.calibration
    p_svm = 1 / (1 + np.exp(-(A * (x @ s.svm.weights + s.svm.bias) + B)))
    expect = 1 / (1 + np.exp(-(s.meta.weights @ [p_lr, p_svm] + s.meta.bias)))
    assert predict_stack(s, x) == pytest.approx(expect, abs=1e-12)


def test_identical_base_outputs_meta_is_monotone():
    X, y = linear_data(6, n=80, noise=0.5)
    s = train_stack(X, y, seed=1)
    p = predict_proba(s.lr, X)
    s.svm = s.lr
    out = predict_stack(s, X)
    assert roc_auc(y, out) == pytest.approx(roc_auc(y, p), abs=1e-12)


def test_stack_not_worse_than_bases():
    gaps = []
    for seed in range(10):
        X, y = linear_data(seed, n=300, d=6, noise=0.3)
        tr, te = slice(0, 210), slice(210, None)
        s = train_stack(X[tr], y[tr], seed=seed)
        acc = lambda p: np.mean((p >= 0.5) == y[te])
        gaps.append((acc(predict_stack(s, X[te])), acc(predict_proba(s.lr, X[te])), acc(predict_proba(s.svm, X[te]))))
    g = np.mean(gaps, axis=0)
    assert g[0] >= g[1] - 0.02 and g[0] >= g[2] - 0.02


def test_stack_deterministic_serialization():
    X, y = linear_data(8, n=100)
    a = json.dumps(train_stack(X, y, seed=4).to_dict())
    b = json.dumps(train_stack(X, y, seed=4).to_dict())
    assert a == b
    d = json.loads(a)
    assert len(d["meta"]["weights"]) == 2 and d["folds"] == 5
