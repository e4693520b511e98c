"""Bag-of-words features: vocabulary construction and sparse vectorization.

Terms are the 1..ngram_max grams of the normalized token stream (bigrams
joined with a single space).  Vocabulary indices are assigned
lexicographically so the feature space never depends on corpus order, and a
CRC-64 fingerprint of the canonical vocabulary serialization binds trained
models to the exact feature space they were fit on.
"""

from __future__ import annotations

import json
import math
from collections import Counter
from dataclasses import dataclass, field
from enum import Enum

import numpy as np
from sklearn.base import BaseEstimator, TransformerMixin

from .errors import EmptyVocabulary
from .hashing import crc64
from .preprocess import NormalizedEssay


class Weighting(str, Enum):
    COUNTS = "COUNTS"
    TFIDF = "TFIDF"


@dataclass(frozen=True)
class FeatureConfig:
    ngram_max: int = 1
    min_df: int = 1
    max_df_ratio: float = 1.0
    weighting: Weighting = Weighting.COUNTS

    def __post_init__(self):
        if self.ngram_max not in (1, 2):
            raise ValueError("ngram_max must be 1 or 2")
        if self.min_df < 1:
            raise ValueError("min_df must be >= 1")
        if not 0 < self.max_df_ratio <= 1:
            raise ValueError("max_df_ratio must be in (0, 1]")
        object.__setattr__(self, "weighting", Weighting(self.weighting))

    def to_dict(self) -> dict:
        return {
            "ngram_max": self.ngram_max,
            "min_df": self.min_df,
            "max_df_ratio": self.max_df_ratio,
            "weighting": self.weighting.value,
        }

    @classmethod
    def from_dict(cls, d: dict) -> "FeatureConfig":
        return cls(**d)


def extract_terms(tokens: list[str], ngram_max: int) -> list[str]:
    """All 1..ngram_max grams of a token sequence, in positional order."""
    terms = list(tokens)
    if ngram_max >= 2:
        terms.extend(f"{a} {b}" for a, b in zip(tokens, tokens[1:]))
    return terms


@dataclass(frozen=True)
class Vocabulary:
    term_to_index: dict[str, int]
    doc_freq: dict[str, int]
    total_docs: int
    config: FeatureConfig
    index_to_term: tuple[str, ...] = field(init=False, repr=False)

    def __post_init__(self):
        terms = sorted(self.term_to_index, key=self.term_to_index.__getitem__)
        object.__setattr__(self, "index_to_term", tuple(terms))

    def __len__(self) -> int:
        return len(self.term_to_index)

    def to_dict(self) -> dict:
        return {
            "config": self.config.to_dict(),
            "total_docs": self.total_docs,
            "terms": [[t, self.doc_freq[t]] for t in self.index_to_term],
        }

    @classmethod
    def from_dict(cls, d: dict) -> "Vocabulary":
        terms = d["terms"]
        return cls(
            term_to_index={t: i for i, (t, _) in enumerate(terms)},
            doc_freq={t: df for t, df in terms},
            total_docs=d["total_docs"],
            config=FeatureConfig.from_dict(d["config"]),
        )

    def canonical_bytes(self) -> bytes:
        return json.dumps(self.to_dict(), sort_keys=True, separators=(",", ":"), ensure_ascii=False).encode("utf-8")

    def fingerprint(self) -> int:
        """CRC-64 of the canonical serialization; stored inside trained models."""
        return crc64(self.canonical_bytes())


@dataclass(frozen=True)
class FeatureVector:
    entries: dict[int, float]
    dimensionality: int

    def __post_init__(self):
        for idx in self.entries:
            if not 0 <= idx < self.dimensionality:
                raise ValueError(f"index {idx} out of range for dimensionality {self.dimensionality}")

    def __len__(self) -> int:
        return len(self.entries)

    def as_arrays(self) -> tuple[np.ndarray, np.ndarray]:
        """(indices, values) sorted by index, for numeric kernels."""
        if not self.entries:
            return np.empty(0, dtype=np.int64), np.empty(0, dtype=np.float64)
        idx = np.fromiter(sorted(self.entries), dtype=np.int64, count=len(self.entries))
        vals = np.array([self.entries[int(i)] for i in idx], dtype=np.float64)
        return idx, vals


def build_vocabulary(corpus: list[NormalizedEssay], config: FeatureConfig) -> Vocabulary:
    """Count document frequencies over the corpus and keep terms inside the
    [min_df, max_df_ratio * N] band, indexed lexicographically."""
    if not corpus:
        raise ValueError("corpus must be non-empty")
    n_docs = len(corpus)
    if config.min_df > n_docs:
        raise ValueError(f"min_df={config.min_df} exceeds corpus size {n_docs}")

    df: Counter[str] = Counter()
    for essay in corpus:
        df.update(set(extract_terms(essay.token_strings(), config.ngram_max)))

    max_df = config.max_df_ratio * n_docs
    retained = sorted(t for t, f in df.items() if config.min_df <= f <= max_df)
    if not retained:
        raise EmptyVocabulary(
            f"no term has document frequency in [{config.min_df}, {max_df:g}] over {n_docs} docs"
        )
    return Vocabulary(
        term_to_index={t: i for i, t in enumerate(retained)},
        doc_freq={t: df[t] for t in retained},
        total_docs=n_docs,
        config=config,
    )


def _tfidf_weight(tf: int, df: int, n_docs: int) -> float:
    return tf * (math.log((1 + n_docs) / (1 + df)) + 1.0)


def vectorize(essay: NormalizedEssay, vocab: Vocabulary) -> FeatureVector:
    """Map one essay into the vocabulary's feature space.

    COUNTS entries are raw term occurrence counts; TFIDF entries are
    tf * (ln((1+N)/(1+df)) + 1), L2-normalized.  Out-of-vocabulary terms are
    dropped, so a zero-overlap essay legally yields an empty vector.
    """
    counts = Counter(extract_terms(essay.token_strings(), vocab.config.ngram_max))
    t2i = vocab.term_to_index
    if vocab.config.weighting is Weighting.COUNTS:
        entries: dict[int, float] = {t2i[t]: c for t, c in counts.items() if t in t2i}
    else:
        entries = {
            t2i[t]: _tfidf_weight(c, vocab.doc_freq[t], vocab.total_docs)
            for t, c in counts.items()
            if t in t2i
        }
        norm = math.sqrt(sum(w * w for w in entries.values()))
        if norm > 0:
            entries = {i: w / norm for i, w in entries.items()}
    return FeatureVector(entries=entries, dimensionality=len(vocab))


class BowVectorizer(TransformerMixin, BaseEstimator):
    """Estimator wrapper: fit builds the vocabulary, transform vectorizes.

    Accepts and returns plain domain objects (NormalizedEssay in,
    FeatureVector out) so it composes in pipelines while keeping the exact
    semantics of build_vocabulary / vectorize.
    """

    def __init__(self, ngram_max: int = 1, min_df: int = 1, max_df_ratio: float = 1.0,
                 weighting: str = "COUNTS"):
        self.ngram_max = ngram_max
        self.min_df = min_df
        self.max_df_ratio = max_df_ratio
        self.weighting = weighting

    def _config(self) -> FeatureConfig:
        return FeatureConfig(
            ngram_max=self.ngram_max,
            min_df=self.min_df,
            max_df_ratio=self.max_df_ratio,
            weighting=Weighting(self.weighting),
        )

    def fit(self, X: list[NormalizedEssay], y=None) -> "BowVectorizer":
        self.vocabulary_ = build_vocabulary(list(X), self._config())
        return self

    def transform(self, X: list[NormalizedEssay]) -> list[FeatureVector]:
        return [vectorize(essay, self.vocabulary_) for essay in X]
