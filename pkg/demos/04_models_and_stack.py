"""
Linear learners, calibration and stacking
=========================================

Train logistic regression and a linear SVM, turn SVM margins into
probabilities with Platt scaling and combine both under a logistic
meta-learner.
"""

import numpy as np

from billfate.evaluation import evaluate_scores
from billfate.models import (Hyper, decision_function, platt_calibrate, predict_proba, predict_stack, sigmoid,
                             train_logistic, train_stack, train_svm)

rng = np.random.default_rng(3)
X = rng.normal(size=(400, 6))
y = ((X @ np.array([1.5, -1.0, 0.5, 0, 0, 0]) + rng.normal(scale=0.7, size=400)) > 1.0).astype(int)
Xtr, ytr, Xte, yte = X[:280], y[:280], X[280:], y[280:]

# %%
lr = train_logistic(Xtr, ytr, Hyper())
print("logistic: iterations", lr.n_iter, "final loss", round(lr.final_loss, 5))

svm = train_svm(Xtr, ytr, Hyper())
print("svm: iterations", svm.n_iter, "objective never increased:", bool(np.all(np.diff(svm.trace) <= 0)))

# %%
# Platt scaling fits p = sigmoid(A * margin + B).
A, B = platt_calibrate(decision_function(svm, Xtr), ytr)
print("A, B =", round(A, 3), round(B, 3))
print("first test margins -> probabilities:", sigmoid(A * decision_function(svm, Xte[:3]) + B))

# %%
# The stack trains its meta-learner on out-of-fold probabilities.
stack = train_stack(Xtr, ytr, k_folds=5, seed=0)
print("meta weights", stack.meta.weights, "bias", stack.meta.bias)
for name, p in (("logistic", predict_proba(stack.lr, Xte)), ("svm", predict_proba(stack.svm, Xte)),
                ("stack", predict_stack(stack, Xte))):
    r = evaluate_scores(name, yte, p)
    print(f"{name:8s} macro F1 {r.macro['f1']:.3f}  AUC {r.auc:.3f}  Brier {r.brier:.3f}")
