"""Templated per-dimension feedback text.

Each dimension carries a template set: for every score in {0, 1, 2} a
non-empty list of variants, constructive at the low end and appreciative at
the high end.  Variant choice is a stable hash of (essay_id + dimension_id),
not a random draw, so a regraded essay produces the same draft and reviewer
edits diff cleanly against it.
"""

from __future__ import annotations

import json
import re
from dataclasses import dataclass, field
from pathlib import Path
from typing import Mapping

from .errors import TemplateMissing, UnknownPlaceholder
from .hashing import fnv1a_64

SCORES = (0, 1, 2)
PLACEHOLDERS = frozenset({"customer_name", "dimension_name"})

_PLACEHOLDER_RE = re.compile(r"\{([^{}]*)\}")


@dataclass(frozen=True)
class FeedbackTemplateSet:
    """Feedback variants for one dimension, keyed by score.

    Construction is permissive (an invalid set can be held and inspected);
    ``validate_template_set`` reports problems and ``render_feedback``
    refuses to draw from an uncovered score.
    """

    dimension_id: str
    variants: Mapping[int, tuple[str, ...]] = field(default_factory=dict)

    def __post_init__(self):
        normalized = {int(score): tuple(templates) for score, templates in self.variants.items()}
        object.__setattr__(self, "variants", normalized)

    def to_dict(self) -> dict:
        d: dict = {"dimension_id": self.dimension_id}
        for score in SCORES:
            d[f"score_{score}"] = list(self.variants.get(score, ()))
        return d

    @classmethod
    def from_dict(cls, d: dict) -> "FeedbackTemplateSet":
        variants = {score: tuple(d.get(f"score_{score}", ())) for score in SCORES}
        return cls(dimension_id=d["dimension_id"], variants=variants)


def _substitute(template: str, context: Mapping[str, str]) -> str:
    def repl(match: re.Match) -> str:
        name = match.group(1)
        if name not in PLACEHOLDERS:
            raise UnknownPlaceholder(f"placeholder {{{name}}} is not one of {sorted(PLACEHOLDERS)}")
        return str(context.get(name, ""))

    return _PLACEHOLDER_RE.sub(repl, template)


def render_feedback(template_set: FeedbackTemplateSet, score: int,
                    context: Mapping[str, str], essay_id: str) -> str:
    """Pick a variant for (essay_id, dimension) and substitute placeholders.

    The variant index is fnv1a_64(utf8(essay_id + dimension_id)) modulo the
    variant count, so the same essay always receives the same draft while
    different essays spread across the variants.
    """
    if score not in SCORES:
        raise ValueError(f"score must be one of {SCORES}, got {score!r}")
    variants = template_set.variants.get(score, ())
    if not variants:
        raise TemplateMissing(
            f"dimension {template_set.dimension_id!r} has no template for score {score}"
        )
    index = fnv1a_64((essay_id + template_set.dimension_id).encode("utf-8")) % len(variants)
    return _substitute(variants[index], context)


def validate_template_set(template_set: FeedbackTemplateSet) -> list[str]:
    """Static checks; returns diagnostics (empty list means valid), never raises.

    Beyond coverage of all three scores, every template must keep some text
    outside its placeholders, so substitution can never yield a blank
    feedback string.
    """
    diagnostics: list[str] = []
    if not template_set.dimension_id:
        diagnostics.append("dimension_id is empty")
    for score in SCORES:
        variants = template_set.variants.get(score, ())
        if not variants:
            diagnostics.append(f"score {score} uncovered")
            continue
        for i, template in enumerate(variants):
            for match in _PLACEHOLDER_RE.finditer(template):
                if match.group(1) not in PLACEHOLDERS:
                    diagnostics.append(
                        f"score {score} variant {i}: unknown placeholder {{{match.group(1)}}}"
                    )
            stripped = _PLACEHOLDER_RE.sub("", template)
            if not stripped.strip():
                diagnostics.append(f"score {score} variant {i}: no text outside placeholders")
            residue = stripped.replace("{", "").replace("}", "")
            if stripped != residue:
                diagnostics.append(f"score {score} variant {i}: unbalanced brace")
    for score in template_set.variants:
        if score not in SCORES:
            diagnostics.append(f"unexpected score key {score}")
    return diagnostics


def load_template_set(path: str | Path) -> FeedbackTemplateSet:
    """Read one dimension's template file (JSON object with dimension_id and
    score_0|1|2 lists)."""
    with open(path, encoding="utf-8") as fh:
        return FeedbackTemplateSet.from_dict(json.load(fh))


def save_template_set(template_set: FeedbackTemplateSet, path: str | Path) -> None:
    Path(path).write_text(
        json.dumps(template_set.to_dict(), indent=2, ensure_ascii=False) + "\n",
        encoding="utf-8",
    )


def default_template_set(dimension_id: str, dimension_name: str | None = None) -> FeedbackTemplateSet:
    """A serviceable three-variant set per score for quick starts and fixtures."""
    del dimension_name  # the rendered name comes from the context at render time
    return FeedbackTemplateSet(
        dimension_id=dimension_id,
        variants={
            0: (
                "{customer_name}, {dimension_name} needs substantial work: revisit this area and rebuild it from the ground up.",
                "This draft falls short on {dimension_name}, {customer_name}; plan a focused revision pass on it.",
                "{dimension_name} is the weakest part of this draft, {customer_name}. Concentrate your next revision here.",
            ),
            1: (
                "{customer_name}, {dimension_name} is on the right track but uneven; tighten the weaker passages.",
                "There is a solid base for {dimension_name}, {customer_name}, yet parts of the essay still need polish.",
                "Good progress on {dimension_name}, {customer_name}; one more careful pass would lift it further.",
            ),
            2: (
                "Excellent work on {dimension_name}, {customer_name}; it reads clearly and confidently.",
                "{customer_name}, your handling of {dimension_name} is a real strength of this essay.",
                "{dimension_name} stands out here, {customer_name}. Keep this level of craft in future drafts.",
            ),
        },
    )
