"""Per-dimension 3-class classifiers over bag-of-words features.

Two model families, both written here rather than delegated so the
determinism and tie-breaking contracts hold exactly:

* MultinomialNaiveBayes: smoothed count model, closed-form fit.
* PegasosSvm: one-vs-rest linear SVM trained by deterministic per-example
  subgradient descent.

Model selection runs through stratified k-fold grid search (grid module);
EvalReport carries accuracy, per-class precision/recall, macro-F1 and the
confusion matrix.
"""

from .base import LabeledExample, to_csr
from .metrics import EvalReport, Metric, evaluate, eval_report
from .naive_bayes import MultinomialNaiveBayes
from .svm import PegasosSvm, svm_objective
from .grid import (
    CellResult,
    GridSearchResult,
    GridSearchSpec,
    default_grid_spec,
    grid_search,
    train_cell,
)

__all__ = [
    "LabeledExample",
    "to_csr",
    "EvalReport",
    "Metric",
    "evaluate",
    "eval_report",
    "MultinomialNaiveBayes",
    "PegasosSvm",
    "svm_objective",
    "CellResult",
    "GridSearchResult",
    "GridSearchSpec",
    "default_grid_spec",
    "grid_search",
    "train_cell",
]
