"""One-vs-rest linear SVM trained with Pegasos-style subgradient descent.

Per class c the objective is lambda/2 ||w_c||^2 + (1/n) sum hinge(y, w_c.x + b_c)
with y = +1 iff label == c.  Training walks the examples in a seeded shuffle
each epoch; step t uses learning rate eta_t = 1/(lambda*t), so the weight
decay factor is exactly (t-1)/t and the weights are kept as scale * stored
to make each update O(nnz).  The bias is not regularized.

The returned model is, per class, the epoch-boundary iterate with the lowest
objective seen so far, with the all-zeros start included as a candidate.  The
raw last iterate of subgradient descent can end an epoch worse than the zero
model; selecting the best visited iterate guarantees objective(trained) <=
objective(zeros) while leaving the descent trajectory itself untouched.

Everything is deterministic given (data order, lambda, epochs, seed); the
three binary problems share the same visit order, which is equivalent to
training them independently with that shuffle.
"""

from __future__ import annotations

import numpy as np
from scipy import sparse
from sklearn.base import BaseEstimator, ClassifierMixin
from sklearn.exceptions import NotFittedError

from ..errors import DegenerateData
from ..features import FeatureVector, Vocabulary
from ..rng import Rng
from .base import CLASSES, N_CLASSES, check_dimensionality, ensure_labels, to_csr

try:
    from numba import njit
except ImportError:  # pragma: no cover - numba is a declared dependency
    def njit(*args, **kwargs):
        if args and callable(args[0]):
            return args[0]
        return lambda fn: fn


@njit(cache=True)
def _pegasos_epoch(indptr, indices, data, y_signs, order, W, b, lam, scale, t):
    """One pass over `order`; W is the unscaled weight store (true w = scale*W).

    Returns the updated (scale, t).  The decay factor (1 - eta*lam) is
    computed as (t-1)/t, its exact algebraic value, so the t=1 step zeroes
    the weights cleanly and triggers a scale flush instead of leaving a
    denormal scale behind.
    """
    n_classes = W.shape[0]
    n_features = W.shape[1]
    viol = np.empty(n_classes, dtype=np.bool_)
    for pos in range(order.shape[0]):
        i = order[pos]
        t += 1
        eta = 1.0 / (lam * t)
        start = indptr[i]
        end = indptr[i + 1]
        for c in range(n_classes):
            dot = 0.0
            for p in range(start, end):
                dot += W[c, indices[p]] * data[p]
            margin = y_signs[c, i] * (scale * dot + b[c])
            viol[c] = margin < 1.0
        scale = scale * ((t - 1.0) / t)
        if scale == 0.0:
            for c in range(n_classes):
                for j in range(n_features):
                    W[c, j] = 0.0
            scale = 1.0
        for c in range(n_classes):
            if viol[c]:
                step = eta * y_signs[c, i] / scale
                for p in range(start, end):
                    W[c, indices[p]] += step * data[p]
                b[c] += eta * y_signs[c, i]
    return scale, t


def pegasos_train_snapshots(
    X: sparse.csr_matrix,
    y: np.ndarray,
    lam: float,
    epochs_list: list[int],
    seed: int,
) -> dict[int, tuple[np.ndarray, np.ndarray]]:
    """Train once for max(epochs_list) epochs, materializing at each requested
    epoch count the per-class best-objective iterate seen up to that epoch.

    The snapshot at E is bitwise identical to a fresh E-epoch run with the
    same seed, because the shuffle stream, every float operation, and the
    running best are shared prefixes.  Grid search uses this to fold runs
    that differ only in the epoch budget.
    """
    if lam <= 0:
        raise ValueError("lambda must be > 0")
    if not epochs_list or min(epochs_list) < 1:
        raise ValueError("epochs must be >= 1")

    X = to_csr(X)
    y = ensure_labels(y)
    n, n_features = X.shape
    y_signs = np.full((N_CLASSES, n), -1.0)
    y_signs[y, np.arange(n)] = 1.0

    W = np.zeros((N_CLASSES, n_features), dtype=np.float64)
    b = np.zeros(N_CLASSES, dtype=np.float64)
    scale, t = 1.0, 0
    rng = Rng(seed)
    wanted = sorted(set(epochs_list))
    snapshots: dict[int, tuple[np.ndarray, np.ndarray]] = {}
    indptr = X.indptr.astype(np.int64)
    indices = X.indices.astype(np.int64)
    data = X.data.astype(np.float64)

    # zero start: hinge is exactly 1 per example, regularizer 0
    best_W = np.zeros_like(W)
    best_b = np.zeros_like(b)
    best_obj = np.ones(N_CLASSES, dtype=np.float64)

    for epoch in range(1, wanted[-1] + 1):
        order = np.array(rng.permutation(n), dtype=np.int64)
        scale, t = _pegasos_epoch(indptr, indices, data, y_signs, order, W, b, lam, scale, t)
        coef_now = scale * W
        obj = svm_objective(coef_now, b, X, y, lam)
        improved = obj < best_obj
        if improved.any():
            best_W[improved] = coef_now[improved]
            best_b[improved] = b[improved]
            best_obj[improved] = obj[improved]
        if epoch in wanted:
            snapshots[epoch] = (best_W.copy(), best_b.copy())
    return snapshots


def svm_objective(coef: np.ndarray, bias: np.ndarray, X, y, lam: float) -> np.ndarray:
    """Per-class regularized hinge objective (the quantity training descends)."""
    X = to_csr(X)
    n = X.shape[0]
    y = ensure_labels(y)
    y_signs = np.full((N_CLASSES, n), -1.0)
    y_signs[y, np.arange(n)] = 1.0
    margins = y_signs * (X @ coef.T + bias).T
    hinge = np.maximum(0.0, 1.0 - margins).sum(axis=1) / n
    reg = 0.5 * lam * (coef * coef).sum(axis=1)
    return reg + hinge


class PegasosSvm(ClassifierMixin, BaseEstimator):
    """sklearn-style estimator over sparse count or tf-idf features."""

    def __init__(self, lam: float = 1e-3, epochs: int = 30, seed: int = 0):
        self.lam = lam
        self.epochs = epochs
        self.seed = seed

    def fit(self, X, y, vocabulary: Vocabulary | None = None) -> "PegasosSvm":
        y = ensure_labels(y)
        if len(np.unique(y)) < 2:
            raise DegenerateData("SVM training needs at least 2 distinct labels")
        mat = to_csr(X)
        if mat.shape[0] != len(y):
            raise ValueError("X and y length mismatch")
        snapshots = pegasos_train_snapshots(mat, y, self.lam, [self.epochs], self.seed)
        coef, bias = snapshots[self.epochs]
        self.classes_ = np.array(CLASSES, dtype=np.int64)
        self.n_features_ = mat.shape[1]
        self.coef_ = coef
        self.intercept_ = bias
        self.vocab_fingerprint_ = vocabulary.fingerprint() if vocabulary is not None else None
        return self

    def _check_fitted(self) -> None:
        if not hasattr(self, "coef_"):
            raise NotFittedError("PegasosSvm is not fitted")

    def decision_function(self, X) -> np.ndarray:
        self._check_fitted()
        mat = to_csr(X, self.n_features_)
        return mat @ self.coef_.T + self.intercept_

    def predict(self, X) -> np.ndarray:
        return np.argmax(self.decision_function(X), axis=1)

    def predict_one(self, fv: FeatureVector) -> tuple[int, tuple[float, float, float]]:
        """Label plus the per-class margin triple for one vector."""
        self._check_fitted()
        check_dimensionality(fv, self.n_features_)
        idx, vals = fv.as_arrays()
        scores = self.intercept_ + self.coef_[:, idx] @ vals
        return int(np.argmax(scores)), tuple(float(s) for s in scores)

    def confidence(self, fv: FeatureVector) -> float:
        """Logistic of (top margin - runner-up margin), in [0, 1]."""
        _, scores = self.predict_one(fv)
        ordered = sorted(scores, reverse=True)
        gap = ordered[0] - ordered[1]
        return float(1.0 / (1.0 + np.exp(-gap)))

    def params_dict(self) -> dict:
        self._check_fitted()
        return {
            "lambda": self.lam,
            "epochs": self.epochs,
            "seed": self.seed,
            "coef": [[float(x) for x in row] for row in self.coef_],
            "intercept": [float(x) for x in self.intercept_],
            "vocab_fingerprint": self.vocab_fingerprint_,
            "n_features": self.n_features_,
        }

    @classmethod
    def from_params_dict(cls, params: dict) -> "PegasosSvm":
        model = cls(lam=params["lambda"], epochs=params["epochs"], seed=params["seed"])
        model.classes_ = np.array(CLASSES, dtype=np.int64)
        model.n_features_ = params["n_features"]
        model.coef_ = np.array(params["coef"], dtype=np.float64).reshape(N_CLASSES, params["n_features"])
        model.intercept_ = np.array(params["intercept"], dtype=np.float64)
        model.vocab_fingerprint_ = params["vocab_fingerprint"]
        return model
