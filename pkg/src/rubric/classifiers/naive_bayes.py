"""Multinomial naive Bayes over term counts, with Laplace smoothing.

Fit is closed-form: class log-priors ln(N_c / N) and per-term
log-likelihoods ln((count(w,c) + alpha) / (total_c + alpha * V)).  A class
absent from the training data keeps a -inf prior and is never predicted.
Prediction ties break toward the smallest class index (the conservative,
lower score).
"""

from __future__ import annotations

import math

import numpy as np
from scipy import sparse
from sklearn.base import BaseEstimator, ClassifierMixin
from sklearn.exceptions import NotFittedError

from ..errors import InvalidFeatures
from ..features import FeatureVector, Vocabulary
from .base import CLASSES, N_CLASSES, check_dimensionality, ensure_labels, to_csr


class MultinomialNaiveBayes(ClassifierMixin, BaseEstimator):
    """sklearn-style estimator; X is a list of FeatureVector or a CSR matrix
    of non-negative integer counts."""

    def __init__(self, alpha: float = 1.0):
        self.alpha = alpha

    def fit(self, X, y, vocabulary: Vocabulary | None = None) -> "MultinomialNaiveBayes":
        if self.alpha <= 0:
            raise ValueError("alpha must be > 0")
        y = ensure_labels(y)
        mat = to_csr(X)
        if mat.shape[0] != len(y):
            raise ValueError("X and y length mismatch")
        if mat.data.size and (np.any(mat.data <= 0) or np.any(mat.data != np.floor(mat.data))):
            raise InvalidFeatures(
                "multinomial naive Bayes requires positive integer counts; "
                "got fractional weights (train on COUNTS features, not TFIDF)"
            )

        n_docs, n_features = mat.shape
        class_counts = np.bincount(y, minlength=N_CLASSES).astype(np.float64)
        term_counts = np.zeros((N_CLASSES, n_features), dtype=np.float64)
        for c in CLASSES:
            rows = np.flatnonzero(y == c)
            if rows.size:
                term_counts[c] = np.asarray(mat[rows].sum(axis=0)).ravel()

        with np.errstate(divide="ignore"):
            prior = np.log(class_counts / n_docs)  # -inf for absent classes
        totals = term_counts.sum(axis=1, keepdims=True)
        loglik = np.log((term_counts + self.alpha) / (totals + self.alpha * n_features))

        self.classes_ = np.array(CLASSES, dtype=np.int64)
        self.n_features_ = n_features
        self.class_log_prior_ = prior
        self.term_log_likelihood_ = loglik
        self.vocab_fingerprint_ = vocabulary.fingerprint() if vocabulary is not None else None
        return self

    def _check_fitted(self) -> None:
        if not hasattr(self, "term_log_likelihood_"):
            raise NotFittedError("MultinomialNaiveBayes is not fitted")

    def decision_function(self, X) -> np.ndarray:
        """Unnormalized per-class log-posteriors, shape (n, 3)."""
        self._check_fitted()
        mat = to_csr(X, self.n_features_)
        return mat @ self.term_log_likelihood_.T + self.class_log_prior_

    def predict(self, X) -> np.ndarray:
        return np.argmax(self.decision_function(X), axis=1)

    def predict_one(self, fv: FeatureVector) -> tuple[int, tuple[float, float, float]]:
        """Label plus the per-class log-posterior triple for one vector."""
        self._check_fitted()
        check_dimensionality(fv, self.n_features_)
        idx, vals = fv.as_arrays()
        scores = self.class_log_prior_ + self.term_log_likelihood_[:, idx] @ vals
        return int(np.argmax(scores)), tuple(float(s) for s in scores)

    def confidence(self, fv: FeatureVector) -> float:
        """Max of the softmax over log-posteriors, in [0, 1]."""
        _, scores = self.predict_one(fv)
        arr = np.array(scores)
        finite = arr[np.isfinite(arr)]
        if finite.size == 0:
            return 0.0
        shifted = np.exp(arr - finite.max())
        return float(shifted.max() / shifted.sum())

    def params_dict(self) -> dict:
        """Serializable parameters (exact float round-trip through JSON)."""
        self._check_fitted()
        return {
            "alpha": self.alpha,
            "class_log_prior": [_encode_float(x) for x in self.class_log_prior_],
            "term_log_likelihood": [[float(x) for x in row] for row in self.term_log_likelihood_],
            "vocab_fingerprint": self.vocab_fingerprint_,
            "n_features": self.n_features_,
        }

    @classmethod
    def from_params_dict(cls, params: dict) -> "MultinomialNaiveBayes":
        model = cls(alpha=params["alpha"])
        model.classes_ = np.array(CLASSES, dtype=np.int64)
        model.n_features_ = params["n_features"]
        model.class_log_prior_ = np.array(
            [_decode_float(x) for x in params["class_log_prior"]], dtype=np.float64
        )
        model.term_log_likelihood_ = np.array(params["term_log_likelihood"], dtype=np.float64)
        model.vocab_fingerprint_ = params["vocab_fingerprint"]
        return model


def _encode_float(x: float) -> float | str:
    # JSON has no -inf literal; absent-class priors need a sentinel.
    if math.isinf(x):
        return "-inf" if x < 0 else "inf"
    return float(x)


def _decode_float(x) -> float:
    if isinstance(x, str):
        return float(x)
    return x
