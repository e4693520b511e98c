"""Evaluation metrics for 3-class score prediction.

Conventions (fixed, also used by grid search): precision of a class with no
predicted instances is 0; recall of a class with no true instances is 0; F1
is 0 when precision + recall is 0.  Macro averages always run over all three
classes.
"""

from __future__ import annotations

from dataclasses import dataclass
from enum import Enum

import numpy as np

from .base import CLASSES, N_CLASSES, LabeledExample, ensure_labels, to_csr


class Metric(str, Enum):
    ACCURACY = "ACCURACY"
    MACRO_F1 = "MACRO_F1"
    MACRO_PRECISION = "MACRO_PRECISION"


@dataclass(frozen=True)
class EvalReport:
    accuracy: float
    precision: tuple[float, float, float]
    recall: tuple[float, float, float]
    macro_f1: float
    confusion: tuple[tuple[int, int, int], ...]  # rows = true class, cols = predicted

    @property
    def macro_precision(self) -> float:
        return sum(self.precision) / N_CLASSES

    def metric(self, which: Metric) -> float:
        if which is Metric.ACCURACY:
            return self.accuracy
        if which is Metric.MACRO_F1:
            return self.macro_f1
        return self.macro_precision

    def to_dict(self) -> dict:
        return {
            "accuracy": self.accuracy,
            "precision": list(self.precision),
            "recall": list(self.recall),
            "macro_f1": self.macro_f1,
            "confusion": [list(row) for row in self.confusion],
        }

    @classmethod
    def from_dict(cls, d: dict) -> "EvalReport":
        return cls(
            accuracy=d["accuracy"],
            precision=tuple(d["precision"]),
            recall=tuple(d["recall"]),
            macro_f1=d["macro_f1"],
            confusion=tuple(tuple(int(x) for x in row) for row in d["confusion"]),
        )


def eval_report(y_true, y_pred) -> EvalReport:
    """Build an EvalReport from parallel label sequences."""
    y_true = ensure_labels(y_true)
    y_pred = ensure_labels(y_pred)
    if y_true.shape != y_pred.shape:
        raise ValueError("y_true and y_pred must have equal length")

    confusion = np.zeros((N_CLASSES, N_CLASSES), dtype=np.int64)
    np.add.at(confusion, (y_true, y_pred), 1)

    accuracy = float(np.trace(confusion)) / len(y_true)
    precision = []
    recall = []
    f1 = []
    for c in CLASSES:
        tp = int(confusion[c, c])
        predicted = int(confusion[:, c].sum())
        support = int(confusion[c, :].sum())
        p = tp / predicted if predicted else 0.0
        r = tp / support if support else 0.0
        precision.append(p)
        recall.append(r)
        f1.append(2 * p * r / (p + r) if p + r else 0.0)

    return EvalReport(
        accuracy=accuracy,
        precision=tuple(precision),
        recall=tuple(recall),
        macro_f1=sum(f1) / N_CLASSES,
        confusion=tuple(tuple(int(x) for x in row) for row in confusion),
    )


def evaluate(model, testset: list[LabeledExample]) -> EvalReport:
    """Score a fitted classifier (anything with .predict over CSR) on a test set."""
    if not testset:
        raise ValueError("testset must be non-empty")
    X = to_csr([ex.features for ex in testset])
    y_true = np.array([ex.label for ex in testset], dtype=np.int64)
    y_pred = model.predict(X)
    return eval_report(y_true, y_pred)
