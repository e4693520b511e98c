"""Stratified k-fold cross-validated grid search over (feature config x
model hyper-parameters), leak-free by construction: every fold builds its
vocabulary from that fold's training documents only.

Enumeration order is fixed and documented because ties go to the earliest
cell: feature configs in spec order (outer); within one, naive Bayes cells
by ascending alpha, then SVM cells by ascending (lambda, epochs).  Naive
Bayes only pairs with COUNTS feature configs (it is a count model); TFIDF
configs carry SVM cells only.

The implementation shares work across cells (term extraction once per
ngram setting, document frequencies by subtraction, SVM epoch snapshots),
but is observationally equivalent to the naive loop over
build_vocabulary / vectorize / fit per cell; a test pins that equivalence.
"""

from __future__ import annotations

from collections import Counter
from dataclasses import dataclass, field
from typing import Sequence

import numpy as np
from scipy import sparse

from ..errors import EmptyVocabulary, InfeasibleStratification
from ..features import (
    FeatureConfig,
    Vocabulary,
    Weighting,
    build_vocabulary,
    extract_terms,
    vectorize,
)
from ..preprocess import NormalizedEssay
from ..rng import Rng
from .base import CLASSES, N_CLASSES, ensure_labels
from .metrics import Metric, eval_report
from .naive_bayes import MultinomialNaiveBayes
from .svm import PegasosSvm, pegasos_train_snapshots


@dataclass(frozen=True)
class GridSearchSpec:
    feature_configs: tuple[FeatureConfig, ...]
    nb_alphas: tuple[float, ...]
    svm_params: tuple[tuple[float, int], ...]  # (lambda, epochs)
    k: int = 5
    seed: int = 0
    metric: Metric = Metric.MACRO_F1

    def __post_init__(self):
        if not self.feature_configs:
            raise ValueError("at least one feature config is required")
        if self.k < 2:
            raise ValueError("k must be >= 2")
        if not self.nb_alphas and not self.svm_params:
            raise ValueError("grid needs at least one model hyper-parameter")
        object.__setattr__(self, "feature_configs", tuple(self.feature_configs))
        object.__setattr__(self, "nb_alphas", tuple(self.nb_alphas))
        object.__setattr__(self, "svm_params", tuple((float(l), int(e)) for l, e in self.svm_params))
        object.__setattr__(self, "metric", Metric(self.metric))

    def to_dict(self) -> dict:
        return {
            "feature_configs": [fc.to_dict() for fc in self.feature_configs],
            "nb_alphas": list(self.nb_alphas),
            "svm_params": [list(p) for p in self.svm_params],
            "k": self.k,
            "seed": self.seed,
            "metric": self.metric.value,
        }

    @classmethod
    def from_dict(cls, d: dict) -> "GridSearchSpec":
        return cls(
            feature_configs=tuple(FeatureConfig.from_dict(fc) for fc in d["feature_configs"]),
            nb_alphas=tuple(d.get("nb_alphas", ())),
            svm_params=tuple(tuple(p) for p in d.get("svm_params", ())),
            k=d.get("k", 5),
            seed=d.get("seed", 0),
            metric=Metric(d.get("metric", "MACRO_F1")),
        )


def default_grid_spec(seed: int = 0, metric: Metric = Metric.MACRO_F1) -> GridSearchSpec:
    """The stock desk-scale grid: {COUNTS, TFIDF} x ngram_max {1,2} x
    min_df {1,2}; NB alpha {0.1, 0.5, 1.0}; SVM lambda {1e-4, 1e-3, 1e-2}
    x epochs {10, 30}; 5 folds."""
    configs = tuple(
        FeatureConfig(ngram_max=n, min_df=m, weighting=w)
        for w in (Weighting.COUNTS, Weighting.TFIDF)
        for n in (1, 2)
        for m in (1, 2)
    )
    return GridSearchSpec(
        feature_configs=configs,
        nb_alphas=(0.1, 0.5, 1.0),
        svm_params=tuple((lam, e) for lam in (1e-4, 1e-3, 1e-2) for e in (10, 30)),
        k=5,
        seed=seed,
        metric=metric,
    )


@dataclass
class CellResult:
    feature_config: FeatureConfig
    model_kind: str  # "nb" | "svm"
    params: dict
    fold_metrics: tuple[float, ...] | None = None
    mean_metric: float | None = None
    error: str | None = None

    def describe(self) -> str:
        fc = self.feature_config
        feat = f"{fc.weighting.value.lower()},ng{fc.ngram_max},df{fc.min_df}"
        if self.model_kind == "nb":
            return f"nb(alpha={self.params['alpha']:g}) {feat}"
        return f"svm(lambda={self.params['lambda']:g},epochs={self.params['epochs']}) {feat}"

    def to_dict(self) -> dict:
        return {
            "feature_config": self.feature_config.to_dict(),
            "model_kind": self.model_kind,
            "params": self.params,
            "fold_metrics": list(self.fold_metrics) if self.fold_metrics is not None else None,
            "mean_metric": self.mean_metric,
            "error": self.error,
        }


@dataclass
class GridSearchResult:
    spec: GridSearchSpec
    cells: list[CellResult]
    best_index: int

    @property
    def best(self) -> CellResult:
        return self.cells[self.best_index]

    def table_str(self) -> str:
        lines = [f"{'cell':>4}  {'mean':>8}  folds{'':<30} description"]
        for i, cell in enumerate(self.cells):
            mark = "*" if i == self.best_index else " "
            if cell.error:
                lines.append(f"{i:>4}{mark} {'-':>8}  error: {cell.error:<33} {cell.describe()}")
            else:
                folds = " ".join(f"{m:.3f}" for m in cell.fold_metrics)
                lines.append(f"{i:>4}{mark} {cell.mean_metric:8.4f}  {folds:<35} {cell.describe()}")
        return "\n".join(lines)

    def to_dict(self) -> dict:
        return {
            "spec": self.spec.to_dict(),
            "cells": [c.to_dict() for c in self.cells],
            "best_index": self.best_index,
        }


def stratified_folds(labels: np.ndarray, k: int, seed: int) -> np.ndarray:
    """Assign each example a fold in [0, k) by seeded within-class shuffle
    plus round-robin; requires every class to appear at least k times."""
    labels = ensure_labels(labels)
    counts = np.bincount(labels, minlength=N_CLASSES)
    lacking = [c for c in CLASSES if counts[c] < k]
    if lacking:
        raise InfeasibleStratification(
            f"classes {lacking} have fewer than k={k} examples "
            f"(counts {counts.tolist()})"
        )
    rng = Rng(seed)
    fold_of = np.empty(len(labels), dtype=np.int64)
    for c in CLASSES:
        idxs = np.flatnonzero(labels == c).tolist()
        rng.shuffle(idxs)
        for j, i in enumerate(idxs):
            fold_of[i] = j % k
    return fold_of


# --- shared corpus precomputation -------------------------------------------


class _TermSpace:
    """Term ids, per-document counts and corpus document frequencies for one
    ngram setting, computed once and reused by every fold and cell."""

    def __init__(self, essays: Sequence[NormalizedEssay], ngram_max: int):
        gid: dict[str, int] = {}
        chunks_g: list[np.ndarray] = []
        chunks_c: list[np.ndarray] = []
        indptr = [0]
        for essay in essays:
            counts = Counter(extract_terms(essay.token_strings(), ngram_max))
            arr_g = np.empty(len(counts), dtype=np.int64)
            arr_c = np.empty(len(counts), dtype=np.int64)
            for j, (term, cnt) in enumerate(counts.items()):
                g = gid.get(term)
                if g is None:
                    g = len(gid)
                    gid[term] = g
                arr_g[j] = g
                arr_c[j] = cnt
            chunks_g.append(arr_g)
            chunks_c.append(arr_c)
            indptr.append(indptr[-1] + len(counts))

        self.n_docs = len(essays)
        self.n_terms = len(gid)
        self.terms: list[str] = [""] * self.n_terms
        for term, g in gid.items():
            self.terms[g] = term
        self.doc_gids = np.concatenate(chunks_g) if chunks_g else np.empty(0, dtype=np.int64)
        self.doc_counts = np.concatenate(chunks_c) if chunks_c else np.empty(0, dtype=np.int64)
        self.doc_indptr = np.array(indptr, dtype=np.int64)
        self.row_ids = np.repeat(np.arange(self.n_docs), np.diff(self.doc_indptr))
        # lexicographic term order; gid per doc is unique, so presence = count
        self.lex_order = np.array(sorted(range(self.n_terms), key=self.terms.__getitem__), dtype=np.int64)
        self.df_total = np.bincount(self.doc_gids, minlength=self.n_terms)

    def df_of_rows(self, rows: np.ndarray) -> np.ndarray:
        segs = [self.doc_gids[self.doc_indptr[r] : self.doc_indptr[r + 1]] for r in rows]
        if not segs:
            return np.zeros(self.n_terms, dtype=np.int64)
        return np.bincount(np.concatenate(segs), minlength=self.n_terms)


@dataclass
class _FoldVocab:
    kept_lex: np.ndarray  # gids of retained terms, lexicographic order
    lut: np.ndarray  # gid -> local feature index, -1 if filtered
    df_train: np.ndarray  # per local index
    n_train: int

    @property
    def size(self) -> int:
        return len(self.kept_lex)


def _fold_vocab(space: _TermSpace, df_val: np.ndarray, n_train: int,
                min_df: int, max_df_ratio: float) -> _FoldVocab | None:
    df_train_all = space.df_total - df_val
    keep = (df_train_all >= min_df) & (df_train_all <= max_df_ratio * n_train)
    kept_lex = space.lex_order[keep[space.lex_order]]
    if len(kept_lex) == 0:
        return None
    lut = np.full(space.n_terms, -1, dtype=np.int64)
    lut[kept_lex] = np.arange(len(kept_lex))
    return _FoldVocab(kept_lex=kept_lex, lut=lut, df_train=df_train_all[kept_lex], n_train=n_train)


def _vectorize_all(space: _TermSpace, fv: _FoldVocab, weighting: Weighting) -> sparse.csr_matrix:
    mapped = fv.lut[space.doc_gids]
    mask = mapped >= 0
    indices = mapped[mask]
    data = space.doc_counts[mask].astype(np.float64)
    rows = space.row_ids[mask]
    row_lens = np.bincount(rows, minlength=space.n_docs)
    indptr = np.zeros(space.n_docs + 1, dtype=np.int64)
    np.cumsum(row_lens, out=indptr[1:])
    mat = sparse.csr_matrix((data, indices, indptr), shape=(space.n_docs, fv.size))
    mat.sort_indices()
    if weighting is Weighting.TFIDF:
        idf = np.log((1.0 + fv.n_train) / (1.0 + fv.df_train)) + 1.0
        mat.data *= idf[mat.indices]
        nnz_rows = np.repeat(np.arange(space.n_docs), np.diff(mat.indptr))
        norms = np.sqrt(np.bincount(nnz_rows, weights=mat.data**2, minlength=space.n_docs))
        nonzero = norms > 0
        scale = np.ones(space.n_docs)
        scale[nonzero] = 1.0 / norms[nonzero]
        mat.data *= scale[nnz_rows]
    return mat


# --- the search itself -------------------------------------------------------


def _enumerate_cells(spec: GridSearchSpec) -> list[CellResult]:
    cells = []
    alphas = sorted(set(spec.nb_alphas))
    svm_params = sorted(set(spec.svm_params))
    for fc in spec.feature_configs:
        if fc.weighting is Weighting.COUNTS:
            for alpha in alphas:
                cells.append(CellResult(feature_config=fc, model_kind="nb", params={"alpha": alpha}))
        for lam, epochs in svm_params:
            cells.append(
                CellResult(feature_config=fc, model_kind="svm", params={"lambda": lam, "epochs": epochs})
            )
    return cells


def _nb_fold_metric(X_train, y_train, X_val, y_val, alpha, metric) -> float:
    n_train, n_features = X_train.shape
    class_counts = np.bincount(y_train, minlength=N_CLASSES).astype(np.float64)
    term_counts = np.zeros((N_CLASSES, n_features), dtype=np.float64)
    for c in CLASSES:
        rows = np.flatnonzero(y_train == c)
        if rows.size:
            term_counts[c] = np.asarray(X_train[rows].sum(axis=0)).ravel()
    with np.errstate(divide="ignore"):
        prior = np.log(class_counts / n_train)
    totals = term_counts.sum(axis=1, keepdims=True)
    loglik = np.log((term_counts + alpha) / (totals + alpha * n_features))
    pred = np.argmax(X_val @ loglik.T + prior, axis=1)
    return eval_report(y_val, pred).metric(metric)


def grid_search(essays: Sequence[NormalizedEssay], labels: Sequence[int],
                spec: GridSearchSpec) -> GridSearchResult:
    """Run the full grid; returns every cell's per-fold and mean metrics plus
    the winning cell (ties keep the earliest in enumeration order).

    A cell whose vocabulary filters away every term on some fold is recorded
    with an error and excluded from the winner; if that happens to every
    cell, EmptyVocabulary propagates.
    """
    essays = list(essays)
    labels = ensure_labels(labels)
    if len(essays) != len(labels):
        raise ValueError("essays and labels length mismatch")
    fold_of = stratified_folds(labels, spec.k, spec.seed)

    cells = _enumerate_cells(spec)
    by_vkey: dict[tuple, list[int]] = {}
    for i, cell in enumerate(cells):
        fc = cell.feature_config
        by_vkey.setdefault((fc.ngram_max, fc.min_df, fc.max_df_ratio), []).append(i)

    spaces = {m: _TermSpace(essays, m) for m in sorted({fc.ngram_max for fc in spec.feature_configs})}
    fold_metrics: dict[int, list[float]] = {i: [] for i in range(len(cells))}
    errors: dict[int, str] = {}

    epochs_by_lam: dict[float, list[int]] = {}
    for lam, epochs in sorted(set(spec.svm_params)):
        epochs_by_lam.setdefault(lam, []).append(epochs)

    for fold in range(spec.k):
        val_rows = np.flatnonzero(fold_of == fold)
        train_rows = np.flatnonzero(fold_of != fold)
        y_train = labels[train_rows]
        y_val = labels[val_rows]

        for vkey in sorted(by_vkey):
            ngram_max, min_df, max_df_ratio = vkey
            space = spaces[ngram_max]
            fvcb = _fold_vocab(space, space.df_of_rows(val_rows), len(train_rows), min_df, max_df_ratio)
            if fvcb is None:
                for i in by_vkey[vkey]:
                    errors.setdefault(i, f"empty vocabulary on fold {fold}")
                continue

            mats: dict[Weighting, sparse.csr_matrix] = {}
            configs_here = {cells[i].feature_config for i in by_vkey[vkey]}
            for fc in sorted(configs_here, key=lambda f: f.weighting.value):
                if fc.weighting not in mats:
                    mats[fc.weighting] = _vectorize_all(space, fvcb, fc.weighting)

            for fc in sorted(configs_here, key=lambda f: f.weighting.value):
                mat = mats[fc.weighting]
                X_train = mat[train_rows]
                X_val = mat[val_rows]
                cell_idxs = [i for i in by_vkey[vkey] if cells[i].feature_config == fc]

                for i in cell_idxs:
                    if cells[i].model_kind != "nb":
                        continue
                    metric = _nb_fold_metric(X_train, y_train, X_val, y_val,
                                             cells[i].params["alpha"], spec.metric)
                    fold_metrics[i].append(metric)

                svm_cells = {
                    (cells[i].params["lambda"], cells[i].params["epochs"]): i
                    for i in cell_idxs
                    if cells[i].model_kind == "svm"
                }
                for lam, epochs_list in epochs_by_lam.items():
                    wanted = [e for e in epochs_list if (lam, e) in svm_cells]
                    if not wanted:
                        continue
                    snapshots = pegasos_train_snapshots(X_train, y_train, lam, wanted, spec.seed)
                    for e in wanted:
                        coef, bias = snapshots[e]
                        pred = np.argmax(X_val @ coef.T + bias, axis=1)
                        fold_metrics[svm_cells[(lam, e)]].append(
                            eval_report(y_val, pred).metric(spec.metric)
                        )

    best_index = None
    best_mean = None
    for i, cell in enumerate(cells):
        if i in errors:
            cell.error = errors[i]
            continue
        cell.fold_metrics = tuple(fold_metrics[i])
        cell.mean_metric = sum(cell.fold_metrics) / spec.k
        if best_mean is None or cell.mean_metric > best_mean:
            best_mean = cell.mean_metric
            best_index = i
    if best_index is None:
        raise EmptyVocabulary("every grid cell produced an empty vocabulary on some fold")
    return GridSearchResult(spec=spec, cells=cells, best_index=best_index)


def train_cell(essays: Sequence[NormalizedEssay], labels: Sequence[int],
               cell: CellResult, seed: int) -> tuple[MultinomialNaiveBayes | PegasosSvm, Vocabulary]:
    """Retrain one cell's configuration on the full corpus through the public
    single-call path (build_vocabulary / vectorize / fit)."""
    essays = list(essays)
    labels = ensure_labels(labels)
    vocab = build_vocabulary(essays, cell.feature_config)
    X = [vectorize(e, vocab) for e in essays]
    if cell.model_kind == "nb":
        model = MultinomialNaiveBayes(alpha=cell.params["alpha"])
    else:
        model = PegasosSvm(lam=cell.params["lambda"], epochs=cell.params["epochs"], seed=seed)
    model.fit(X, labels, vocabulary=vocab)
    return model, vocab
