"""Essay normalization: the single entry gate of the scoring pipeline.

Raw customer text is turned into an ordered token stream through a fixed
sequence of steps: NFC normalization, whitespace tokenization with edge
punctuation split off, entity masking (email / URL / number, optional person
heuristic), pure-punctuation removal, lowercasing, stopword removal.  Masking
runs before lowercasing because the person heuristic needs capitalization.

Everything here is a pure function of (input, config): identical inputs give
byte-identical outputs, and re-normalizing the space-joined output is a
no-op.
"""

from __future__ import annotations

import re
import unicodedata
from dataclasses import dataclass, field
from datetime import datetime
from enum import Enum
from importlib import resources
from pathlib import Path

from sklearn.base import BaseEstimator, TransformerMixin

from .errors import EmptyAfterNormalization, EmptyEssay

EMAIL_MASK = "⟨email⟩"
URL_MASK = "⟨url⟩"
NUMBER_MASK = "⟨num⟩"
PERSON_MASK = "⟨person⟩"

#: Sentinels are atomic for the tokenizer, so normalization is idempotent.
SENTINELS = {EMAIL_MASK, URL_MASK, NUMBER_MASK, PERSON_MASK}

_EMAIL_RE = re.compile(r"^[A-Za-z0-9._%+\-]+@[A-Za-z0-9.\-]+\.[A-Za-z]{2,}$")
_URL_RE = re.compile(r"^(?:[A-Za-z][A-Za-z0-9+.\-]*://\S+|www\.\S+)$")
_NUMBER_RE = re.compile(r"^\d+(?:[.,\-]\d+)*$")


class TokenKind(str, Enum):
    WORD = "WORD"
    EMAIL_MASK = "EMAIL_MASK"
    URL_MASK = "URL_MASK"
    NUMBER_MASK = "NUMBER_MASK"
    PERSON_MASK = "PERSON_MASK"


_KIND_BY_SENTINEL = {
    EMAIL_MASK: TokenKind.EMAIL_MASK,
    URL_MASK: TokenKind.URL_MASK,
    NUMBER_MASK: TokenKind.NUMBER_MASK,
    PERSON_MASK: TokenKind.PERSON_MASK,
}


@dataclass(frozen=True)
class Token:
    normalized: str
    kind: TokenKind = TokenKind.WORD


@dataclass(frozen=True)
class RawEssay:
    """One customer submission as received."""

    essay_id: str
    customer_name: str
    submitted_at: datetime
    body: str

    def __post_init__(self):
        if not self.essay_id:
            raise ValueError("essay_id must be non-empty")

    def to_dict(self) -> dict:
        from . import clock

        return {
            "essay_id": self.essay_id,
            "customer_name": self.customer_name,
            "submitted_at": clock.isoformat(self.submitted_at),
            "body": self.body,
        }

    @classmethod
    def from_dict(cls, d: dict) -> "RawEssay":
        from . import clock

        return cls(
            essay_id=d["essay_id"],
            customer_name=d["customer_name"],
            submitted_at=clock.parse_instant(d["submitted_at"]),
            body=d["body"],
        )


@dataclass(frozen=True)
class PreprocessConfig:
    stopwords: frozenset[str] = field(default_factory=frozenset)
    mask_email: bool = True
    mask_url: bool = True
    mask_number: bool = True
    mask_person: bool = False
    person_gazetteer: frozenset[str] = field(default_factory=frozenset)

    def __post_init__(self):
        for word in self.stopwords:
            if not word or word != word.lower() or any(c.isspace() for c in word):
                raise ValueError(f"invalid stopword {word!r}: must be lowercase with no whitespace")


@dataclass(frozen=True)
class NormalizedEssay:
    essay_id: str
    customer_name: str
    tokens: tuple[Token, ...]
    original_char_count: int

    def token_strings(self) -> list[str]:
        return [t.normalized for t in self.tokens]


def _is_word_char(ch: str) -> bool:
    return ch.isalnum()


def tokenize(text: str) -> list[str]:
    """Split on whitespace, then peel leading/trailing non-alphanumeric
    characters off each chunk as individual tokens.

    Internal punctuation stays inside the token, which keeps emails, URLs,
    decimal numbers, contractions and hyphenations intact for the masking
    pass.  Mask sentinels pass through whole.
    """
    out: list[str] = []
    for chunk in text.split():
        if chunk in SENTINELS:
            out.append(chunk)
            continue
        first = None
        last = None
        for i, ch in enumerate(chunk):
            if _is_word_char(ch):
                if first is None:
                    first = i
                last = i
        if first is None:
            out.extend(chunk)  # all punctuation: one token per character
            continue
        out.extend(chunk[:first])
        out.append(chunk[first : last + 1])
        out.extend(chunk[last + 1 :])
    return out


def _is_capitalized_alpha(token: str) -> bool:
    if not token or not token[0].isupper():
        return False
    return all(c.isalpha() or c in "'-" for c in token)


def mask_entities(tokens: list[str], config: PreprocessConfig) -> list[str]:
    """Replace entity tokens with mask sentinels.

    Email, URL and number patterns match whole tokens.  The person pass then
    collapses each maximal run of person-like tokens (gazetteer hits, or
    capitalized alphabetic runs of length >= 2) into one sentinel.  Must run
    before lowercasing.
    """
    masked: list[str] = []
    for tok in tokens:
        if tok in SENTINELS:
            masked.append(tok)
        elif config.mask_email and _EMAIL_RE.match(tok):
            masked.append(EMAIL_MASK)
        elif config.mask_url and _URL_RE.match(tok):
            masked.append(URL_MASK)
        elif config.mask_number and _NUMBER_RE.match(tok):
            masked.append(NUMBER_MASK)
        else:
            masked.append(tok)

    if not config.mask_person:
        return masked

    capalpha = [_is_capitalized_alpha(t) and t not in SENTINELS for t in masked]
    personish = [
        t in config.person_gazetteer
        or (capalpha[i] and ((i > 0 and capalpha[i - 1]) or (i + 1 < len(masked) and capalpha[i + 1])))
        for i, t in enumerate(masked)
    ]
    out: list[str] = []
    i = 0
    while i < len(masked):
        if personish[i]:
            out.append(PERSON_MASK)
            while i < len(masked) and personish[i]:
                i += 1
        else:
            out.append(masked[i])
            i += 1
    return out


def _is_pure_punctuation(token: str) -> bool:
    return not any(_is_word_char(c) for c in token)


def normalize(raw: RawEssay, config: PreprocessConfig) -> NormalizedEssay:
    """Run the full fixed-order normalization over one essay.

    Raises EmptyEssay for an all-whitespace body and EmptyAfterNormalization
    when no token survives (the essay is ungradeable).
    """
    if not raw.body.strip():
        raise EmptyEssay(f"essay {raw.essay_id}: body is empty or whitespace")

    text = unicodedata.normalize("NFC", raw.body)
    tokens = mask_entities(tokenize(text), config)

    result: list[Token] = []
    for tok in tokens:
        if tok in SENTINELS:
            if tok not in config.stopwords:
                result.append(Token(tok, _KIND_BY_SENTINEL[tok]))
            continue
        if _is_pure_punctuation(tok):
            continue
        lowered = tok.lower()
        if lowered in config.stopwords:
            continue
        result.append(Token(lowered, TokenKind.WORD))

    if not result:
        raise EmptyAfterNormalization(f"essay {raw.essay_id}: no tokens survived normalization")
    return NormalizedEssay(
        essay_id=raw.essay_id,
        customer_name=raw.customer_name,
        tokens=tuple(result),
        original_char_count=len(raw.body),
    )


def load_stopwords(path: str | Path) -> frozenset[str]:
    """Read a stopword file: one lowercase term per line, ``#`` comments ignored."""
    words = set()
    for line in Path(path).read_text(encoding="utf-8").splitlines():
        term = line.split("#", 1)[0].strip()
        if term:
            words.add(term)
    return frozenset(words)


def default_stopwords() -> frozenset[str]:
    """The stopword list shipped with the package (~120 English function words)."""
    text = resources.files("rubric").joinpath("data/stopwords.txt").read_text(encoding="utf-8")
    words = {line.split("#", 1)[0].strip() for line in text.splitlines()}
    return frozenset(w for w in words if w)


def default_config(**overrides) -> PreprocessConfig:
    return PreprocessConfig(stopwords=default_stopwords(), **overrides)


class EssayNormalizer(TransformerMixin, BaseEstimator):
    """Estimator-protocol wrapper over :func:`normalize` so normalization can
    sit first in a pipeline: transform maps RawEssay lists to NormalizedEssay
    lists.  Stateless; fit only records the config in use."""

    def __init__(self, config: PreprocessConfig | None = None):
        self.config = config

    def fit(self, X=None, y=None):
        self.config_ = self.config if self.config is not None else default_config()
        return self

    def transform(self, X) -> list[NormalizedEssay]:
        if not hasattr(self, "config_"):
            self.fit()
        return [normalize(raw, self.config_) for raw in X]
