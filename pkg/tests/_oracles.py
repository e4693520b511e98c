"""Independent reference implementations used as test oracles.

Everything here recomputes expected values from first principles (explicit
counting, rational arithmetic, straight-line re-implementations of the
documented steps) rather than calling back into the code under test, so an
agreement between the two is evidence of correctness, not circularity.
"""

from __future__ import annotations

import math
import re
import unicodedata
from decimal import ROUND_HALF_UP, Decimal
from fractions import Fraction

from rubric.classifiers import MultinomialNaiveBayes, PegasosSvm
from rubric.features import build_vocabulary, vectorize


# ---------------------------------------------------------------------------
# Naive Bayes by explicit counting.


def nb_brute_force(docs: list[dict[int, int]], labels: list[int], alpha: float, vocab_size: int):
    """Return a function mapping a query count-dict to per-class log posteriors.

    Works entirely with explicit tallies and exact Fractions converted to
    floats at the last step.
    """
    n = len(docs)
    class_counts = {c: labels.count(c) for c in (0, 1, 2)}
    term_counts = {c: [0] * vocab_size for c in (0, 1, 2)}
    totals = {c: 0 for c in (0, 1, 2)}
    for doc, lab in zip(docs, labels):
        for idx, cnt in doc.items():
            term_counts[lab][idx] += cnt
            totals[lab] += cnt

    a = Fraction(alpha)  # exact value of the float, so the tally stays rational

    def posteriors(query: dict[int, int]) -> list[float]:
        out = []
        for c in (0, 1, 2):
            if class_counts[c] == 0:
                out.append(float("-inf"))
                continue
            score = math.log(Fraction(class_counts[c], n))
            denom = totals[c] + a * vocab_size
            for idx, cnt in query.items():
                prob = (term_counts[c][idx] + a) / denom
                score += cnt * math.log(prob)
            out.append(score)
        return out

    return posteriors


def argmax_smallest(scores) -> int:
    best = 0
    for i in range(1, len(scores)):
        if scores[i] > scores[best]:
            best = i
    return best


# ---------------------------------------------------------------------------
# Text normalization as a straight-line script.

_REF_EMAIL = re.compile(r"^[A-Za-z0-9._%+-]+@[A-Za-z0-9-]+(\.[A-Za-z0-9-]+)+$")
_REF_URL = re.compile(r"^([A-Za-z][A-Za-z0-9+.-]*://\S+|www\.\S+)$")
_REF_NUMBER = re.compile(r"^\d+([.,\-]\d+)*$")

_SENTINELS = {"⟨email⟩", "⟨url⟩", "⟨num⟩", "⟨person⟩"}


def ref_normalize(body: str, stopwords: frozenset[str], mask_person: bool = False,
                  gazetteer: frozenset[str] = frozenset()) -> list[str]:
    """Apply NFC, tokenize, mask, punctuation-drop, lowercase, stopword-drop
    in order, with no shared code with the package."""
    text = unicodedata.normalize("NFC", body)

    tokens: list[str] = []
    for chunk in text.split():
        if chunk in _SENTINELS:
            tokens.append(chunk)
            continue
        word_positions = [i for i, ch in enumerate(chunk) if ch.isalnum()]
        if not word_positions:
            tokens.extend(list(chunk))
            continue
        lo, hi = word_positions[0], word_positions[-1]
        tokens.extend(list(chunk[:lo]))
        tokens.append(chunk[lo : hi + 1])
        tokens.extend(list(chunk[hi + 1 :]))

    masked: list[str] = []
    for tok in tokens:
        if tok in _SENTINELS:
            masked.append(tok)
        elif _REF_EMAIL.match(tok):
            masked.append("⟨email⟩")
        elif _REF_URL.match(tok):
            masked.append("⟨url⟩")
        elif _REF_NUMBER.match(tok):
            masked.append("⟨num⟩")
        else:
            masked.append(tok)

    if mask_person:
        def cap_alpha(t: str) -> bool:
            return bool(t) and t[0].isupper() and all(c.isalpha() or c in "'-" for c in t)

        flags = []
        for i, t in enumerate(masked):
            if t in gazetteer:
                flags.append(True)
            elif t not in _SENTINELS and cap_alpha(t):
                prev_cap = i > 0 and masked[i - 1] not in _SENTINELS and cap_alpha(masked[i - 1])
                next_cap = i + 1 < len(masked) and masked[i + 1] not in _SENTINELS and cap_alpha(masked[i + 1])
                flags.append(prev_cap or next_cap)
            else:
                flags.append(False)
        collapsed: list[str] = []
        i = 0
        while i < len(masked):
            if flags[i]:
                collapsed.append("⟨person⟩")
                while i < len(masked) and flags[i]:
                    i += 1
            else:
                collapsed.append(masked[i])
                i += 1
        masked = collapsed

    out: list[str] = []
    for tok in masked:
        if tok in _SENTINELS:
            out.append(tok)
            continue
        if not any(c.isalnum() for c in tok):
            continue
        low = tok.lower()
        if low in stopwords:
            continue
        out.append(low)
    return out


# ---------------------------------------------------------------------------
# Evaluation metrics by explicit tallies.


def ref_metrics(y_true: list[int], y_pred: list[int]) -> dict:
    n = len(y_true)
    confusion = [[0] * 3 for _ in range(3)]
    for t, p in zip(y_true, y_pred):
        confusion[t][p] += 1
    accuracy = sum(confusion[c][c] for c in range(3)) / n
    precision, recall, f1 = [], [], []
    for c in range(3):
        pred_c = sum(confusion[t][c] for t in range(3))
        true_c = sum(confusion[c])
        tp = confusion[c][c]
        p = tp / pred_c if pred_c else 0.0
        r = tp / true_c if true_c else 0.0
        precision.append(p)
        recall.append(r)
        f1.append(2 * p * r / (p + r) if p + r else 0.0)
    return {
        "accuracy": accuracy,
        "precision": precision,
        "recall": recall,
        "macro_f1": sum(f1) / 3,
        "confusion": confusion,
    }


# ---------------------------------------------------------------------------
# Grid search the slow, obvious way, through the public API only.


def ref_stratified_folds(labels: list[int], k: int, seed: int) -> list[list[int]]:
    """Same contract as the fast implementation: per-class seeded shuffle,
    then round-robin over fold index j % k."""
    from rubric.rng import Rng

    rng = Rng(seed)
    folds: list[list[int]] = [[] for _ in range(k)]
    for cls in (0, 1, 2):
        members = [i for i, y in enumerate(labels) if y == cls]
        rng.shuffle(members)
        for j, idx in enumerate(members):
            folds[j % k].append(idx)
    return [sorted(f) for f in folds]


def ref_grid_search(essays, labels, spec):
    """Naive re-implementation: per cell, per fold, rebuild the vocabulary on
    the training fold via the public API, train, score the validation fold.

    Returns (cells, winner_index) where cells is a list of dicts with the
    cell's description and mean metric (None when every fold failed).
    """
    from rubric.classifiers.metrics import eval_report
    from rubric.errors import RubricError
    from rubric.features import Weighting

    k = spec.k
    folds = ref_stratified_folds(list(labels), k, spec.seed)

    cells = []
    for config in spec.feature_configs:
        if config.weighting is Weighting.COUNTS:
            for alpha in sorted(set(spec.nb_alphas)):
                cells.append((config, ("NB", alpha)))
        for lam, epochs in sorted(set(spec.svm_params)):
            cells.append((config, ("SVM", lam, epochs)))

    results = []
    for config, hyper in cells:
        fold_scores = []
        failed = False
        for j in range(k):
            val_idx = set(folds[j])
            train_essays = [essays[i] for i in range(len(essays)) if i not in val_idx]
            train_labels = [labels[i] for i in range(len(essays)) if i not in val_idx]
            try:
                vocab = build_vocabulary(train_essays, config)
                X_train = [vectorize(e, vocab) for e in train_essays]
                if hyper[0] == "NB":
                    model = MultinomialNaiveBayes(alpha=hyper[1])
                else:
                    model = PegasosSvm(lam=hyper[1], epochs=hyper[2], seed=spec.seed)
                model.fit(X_train, train_labels, vocabulary=vocab)
                y_true = [labels[i] for i in sorted(val_idx)]
                y_pred = [model.predict_one(vectorize(essays[i], vocab))[0] for i in sorted(val_idx)]
                report = eval_report(y_true, y_pred)
                name = spec.metric.value
                if name == "ACCURACY":
                    fold_scores.append(report.accuracy)
                elif name == "MACRO_F1":
                    fold_scores.append(report.macro_f1)
                else:
                    fold_scores.append(sum(report.precision) / 3)
            except RubricError:
                failed = True
                break
        results.append(None if failed else sum(fold_scores) / k)

    winner = None
    for i, mean in enumerate(results):
        if mean is None:
            continue
        if winner is None or mean > results[winner]:
            winner = i
    return results, winner


# ---------------------------------------------------------------------------
# Misc small oracles.


def ref_round_half_up_2dp(value: Fraction) -> str:
    d = Decimal(value.numerator) / Decimal(value.denominator)
    return str(d.quantize(Decimal("0.01"), rounding=ROUND_HALF_UP))


def ref_weighted_mean(weights: list[Fraction], scores: list[int]) -> Fraction:
    num = sum((w * s for w, s in zip(weights, scores)), Fraction(0))
    den = sum(weights, Fraction(0))
    return num / den
