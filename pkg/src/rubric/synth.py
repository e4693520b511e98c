"""Deterministic synthetic essay corpus with per-dimension ground truth.

Real customer essays are proprietary, so tests and quick starts run on
generated ones.  Each dimension owns three pairwise-disjoint families of
pseudo-word keywords, one per score.  The density rule: every essay contains
exactly KEYWORDS_PER_DIMENSION (5) tokens drawn from the planted score's
family for each dimension, padded with neutral filler words to a total
length of 150..400 tokens, then shuffled.  Scores are therefore recoverable
from keyword evidence by construction, which is what makes the corpus a
useful classifier fixture.

Draw order from the seeded stream, per essay (fixed; corpora are
byte-identical across runs and platforms for a given spec):

    1. customer first name, last name
    2. total token count L in [150, 400]
    3. per dimension, in spec order: planted score; noise roll; when the
       roll fires, the recorded label is re-drawn (the keywords still
       reflect the planted score, so noise produces mislabeled examples)
    4. L - 5*D filler tokens
    5. per dimension, in spec order, 5 keyword tokens from the planted
       score's family
    6. one shuffle of the token list
"""

from __future__ import annotations

from dataclasses import dataclass, field
from datetime import datetime, timedelta, timezone

from .preprocess import RawEssay
from .rng import Rng

KEYWORDS_PER_DIMENSION = 5
MIN_TOKENS = 150
MAX_TOKENS = 400
_NOISE_SCALE = 1_000_000

_FIRST_NAMES = (
    "Ada", "Bruno", "Carla", "Dev", "Elif", "Farid", "Greta", "Hana",
    "Ivo", "Jun", "Kirsten", "Lars", "Mina", "Noor", "Otto", "Priya",
)
_LAST_NAMES = (
    "Abbott", "Becker", "Castillo", "Devi", "Eriksen", "Fontaine", "Guzman", "Haddad",
    "Iqbal", "Jensen", "Kowalski", "Lindgren", "Moreau", "Novak", "Okafor", "Petrov",
)

_FILLER_WORDS = (
    "morning", "garden", "window", "river", "mountain", "coffee", "paper",
    "journey", "market", "bridge", "forest", "harbor", "lantern", "meadow",
    "orchard", "pebble", "quarry", "ribbon", "saddle", "timber", "valley",
    "willow", "anchor", "basket", "candle", "drawer", "engine", "fabric",
    "granite", "hollow", "island", "jacket", "kettle", "ladder", "marble",
    "needle", "oven", "pillow", "quilt", "rooster",
)

_KEYWORD_CONSONANTS = "bdfgklmnprstv"  # one per dimension, up to 13
_KEYWORD_VOWELS = "aei"  # one per score
_KEYWORD_SUFFIXES = ("zan", "mur", "vit", "kol", "pex", "dra")

_BASE_SUBMITTED_AT = datetime(2025, 6, 1, tzinfo=timezone.utc)


@dataclass(frozen=True)
class DimensionKeywords:
    """One dimension's keyword families, index = score."""

    dimension_id: str
    families: tuple[tuple[str, ...], tuple[str, ...], tuple[str, ...]]

    def __post_init__(self):
        if not self.dimension_id:
            raise ValueError("dimension_id must be non-empty")
        sets = [frozenset(f) for f in self.families]
        if any(not s for s in sets):
            raise ValueError(f"{self.dimension_id}: every score needs at least one keyword")
        if len(sets[0] | sets[1] | sets[2]) != sum(len(s) for s in sets):
            raise ValueError(f"{self.dimension_id}: keyword families must be pairwise disjoint")


@dataclass(frozen=True)
class GeneratorSpec:
    seed: int
    essay_count: int = 1000
    dimensions: tuple[DimensionKeywords, ...] = ()
    label_noise: float = 0.0
    filler: tuple[str, ...] = _FILLER_WORDS

    def __post_init__(self):
        if self.essay_count < 1:
            raise ValueError("essay_count must be >= 1")
        if not self.dimensions:
            raise ValueError("at least one dimension is required")
        ids = [d.dimension_id for d in self.dimensions]
        if len(set(ids)) != len(ids):
            raise ValueError("dimension ids must be unique")
        if not 0.0 <= self.label_noise < 0.5:
            raise ValueError("label_noise must lie in [0, 0.5)")
        if not self.filler:
            raise ValueError("filler vocabulary must be non-empty")
        if KEYWORDS_PER_DIMENSION * len(self.dimensions) > MIN_TOKENS:
            raise ValueError(
                f"{len(self.dimensions)} dimensions need more than {MIN_TOKENS} tokens"
            )


def keyword_family(dimension_index: int, score: int) -> tuple[str, ...]:
    """Pseudo-word family for (dimension, score); families are disjoint by
    construction because each has a distinct consonant+vowel prefix."""
    c = _KEYWORD_CONSONANTS[dimension_index]
    v = _KEYWORD_VOWELS[score]
    return tuple(f"{c}{v}{suffix}" for suffix in _KEYWORD_SUFFIXES)


def default_dimensions(count: int = 13) -> tuple[DimensionKeywords, ...]:
    if not 1 <= count <= len(_KEYWORD_CONSONANTS):
        raise ValueError(f"count must be in [1, {len(_KEYWORD_CONSONANTS)}]")
    return tuple(
        DimensionKeywords(
            dimension_id=f"d{i + 1:02d}",
            families=(keyword_family(i, 0), keyword_family(i, 1), keyword_family(i, 2)),
        )
        for i in range(count)
    )


def default_generator_spec(seed: int = 42, essay_count: int = 1000,
                           label_noise: float = 0.0) -> GeneratorSpec:
    return GeneratorSpec(
        seed=seed,
        essay_count=essay_count,
        dimensions=default_dimensions(),
        label_noise=label_noise,
    )


def generate(spec: GeneratorSpec) -> tuple[list[RawEssay], dict[str, dict[str, int]]]:
    """Produce (essays, labels) fully determined by the spec.

    labels maps essay_id -> dimension_id -> recorded score (recorded, not
    planted: under label_noise the two can differ).
    """
    rng = Rng(spec.seed)
    noise_threshold = round(spec.label_noise * _NOISE_SCALE)
    id_width = max(4, len(str(spec.essay_count - 1)))

    essays: list[RawEssay] = []
    labels: dict[str, dict[str, int]] = {}
    for i in range(spec.essay_count):
        essay_id = f"e{i:0{id_width}d}"
        first = _FIRST_NAMES[rng.below(len(_FIRST_NAMES))]
        last = _LAST_NAMES[rng.below(len(_LAST_NAMES))]
        total = MIN_TOKENS + rng.below(MAX_TOKENS - MIN_TOKENS + 1)

        planted: list[int] = []
        recorded: dict[str, int] = {}
        for dim in spec.dimensions:
            score = rng.below(3)
            planted.append(score)
            roll = rng.below(_NOISE_SCALE)
            recorded[dim.dimension_id] = rng.below(3) if roll < noise_threshold else score

        tokens: list[str] = []
        for _ in range(total - KEYWORDS_PER_DIMENSION * len(spec.dimensions)):
            tokens.append(spec.filler[rng.below(len(spec.filler))])
        for dim, score in zip(spec.dimensions, planted):
            family = dim.families[score]
            for _ in range(KEYWORDS_PER_DIMENSION):
                tokens.append(family[rng.below(len(family))])
        rng.shuffle(tokens)

        essays.append(
            RawEssay(
                essay_id=essay_id,
                customer_name=f"{first} {last}",
                submitted_at=_BASE_SUBMITTED_AT + timedelta(minutes=i),
                body=" ".join(tokens),
            )
        )
        labels[essay_id] = recorded
    return essays, labels
