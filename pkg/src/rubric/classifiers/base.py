"""Shared pieces: the label domain, example container, sparse conversion."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from scipy import sparse

from ..errors import VocabMismatch
from ..features import FeatureVector

#: The rubric score domain: 0 unsatisfactory, 1 improvements needed, 2 satisfactory.
CLASSES = (0, 1, 2)
N_CLASSES = len(CLASSES)


@dataclass(frozen=True)
class LabeledExample:
    features: FeatureVector
    label: int

    def __post_init__(self):
        if self.label not in CLASSES:
            raise ValueError(f"label must be one of {CLASSES}, got {self.label}")


def ensure_labels(y) -> np.ndarray:
    y = np.asarray(y, dtype=np.int64)
    if y.ndim != 1 or y.size == 0:
        raise ValueError("y must be a non-empty 1-d sequence of labels")
    if not np.isin(y, CLASSES).all():
        raise ValueError(f"labels must be in {CLASSES}")
    return y


def to_csr(X, n_features: int | None = None) -> sparse.csr_matrix:
    """Accept a CSR matrix or a list of FeatureVector and return CSR with
    sorted indices (the order every numeric kernel assumes)."""
    if sparse.issparse(X):
        mat = X.tocsr()
        if not mat.has_sorted_indices:
            mat = mat.copy()
            mat.sort_indices()
        return mat
    vectors = list(X)
    if not vectors:
        raise ValueError("X must be non-empty")
    dim = vectors[0].dimensionality
    for fv in vectors:
        if fv.dimensionality != dim:
            raise VocabMismatch(
                f"mixed dimensionalities in batch: {fv.dimensionality} != {dim}"
            )
    if n_features is not None and dim != n_features:
        raise VocabMismatch(f"feature vectors have dimensionality {dim}, expected {n_features}")
    indptr = np.zeros(len(vectors) + 1, dtype=np.int64)
    chunks_idx = []
    chunks_val = []
    for row, fv in enumerate(vectors):
        idx, vals = fv.as_arrays()
        chunks_idx.append(idx)
        chunks_val.append(vals)
        indptr[row + 1] = indptr[row] + len(idx)
    indices = np.concatenate(chunks_idx) if chunks_idx else np.empty(0, dtype=np.int64)
    data = np.concatenate(chunks_val) if chunks_val else np.empty(0, dtype=np.float64)
    return sparse.csr_matrix((data, indices, indptr), shape=(len(vectors), dim))


def check_dimensionality(fv: FeatureVector, n_features: int) -> None:
    if fv.dimensionality != n_features:
        raise VocabMismatch(
            f"feature vector has dimensionality {fv.dimensionality}, model expects {n_features}"
        )
