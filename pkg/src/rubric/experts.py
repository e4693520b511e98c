"""Per-dimension scoring experts and their orchestration.

A registry holds one expert per rubric dimension (13 in the stock setup).
Each expert owns its model, vocabulary and feedback templates, so models can
be retrained and swapped per dimension and new dimensions added without
touching the others.  The pipeline normalizes an essay once, fans it out to
every expert, and reduces the results into a MasterObject whose final score
is the exact rational weighted mean of the per-dimension scores.
"""

from __future__ import annotations

from concurrent.futures import ThreadPoolExecutor, as_completed
from dataclasses import dataclass, field
from datetime import datetime
from fractions import Fraction
from typing import Callable, Iterable, Iterator, Mapping, Protocol, Sequence

from . import clock
from .errors import (
    AllZeroWeights,
    DuplicateDimension,
    ExpertFailure,
    IncompleteResults,
    TemplateMissing,
    UnresolvableModel,
    VocabMismatch,
)
from .feedback import FeedbackTemplateSet, render_feedback
from .features import FeatureVector, Vocabulary, vectorize
from .preprocess import NormalizedEssay, PreprocessConfig, RawEssay, normalize


class ScoringModel(Protocol):
    vocab_fingerprint_: int | None

    def predict_one(self, fv: FeatureVector) -> tuple[int, tuple[float, float, float]]: ...

    def confidence(self, fv: FeatureVector) -> float: ...


@dataclass(frozen=True)
class ExpertDescriptor:
    """Configuration of one dimension's expert; weights are exact rationals."""

    dimension_id: str
    display_name: str
    weight: Fraction
    model_ref: str
    template_set_ref: str

    def __post_init__(self):
        if not self.dimension_id:
            raise ValueError("dimension_id must be non-empty")
        weight = Fraction(str(self.weight)) if not isinstance(self.weight, Fraction) else self.weight
        if weight < 0:
            raise ValueError(f"weight must be >= 0, got {weight}")
        object.__setattr__(self, "weight", weight)

    def to_dict(self) -> dict:
        return {
            "dimension_id": self.dimension_id,
            "display_name": self.display_name,
            "weight": str(self.weight),
            "model_ref": self.model_ref,
            "template_set_ref": self.template_set_ref,
        }

    @classmethod
    def from_dict(cls, d: dict) -> "ExpertDescriptor":
        return cls(
            dimension_id=d["dimension_id"],
            display_name=d["display_name"],
            weight=Fraction(str(d["weight"])),
            model_ref=d["model_ref"],
            template_set_ref=d["template_set_ref"],
        )


@dataclass(frozen=True)
class ResolvedExpert:
    """A descriptor with its model, vocabulary and templates loaded."""

    descriptor: ExpertDescriptor
    model: ScoringModel
    vocabulary: Vocabulary
    templates: FeedbackTemplateSet
    model_version: str

    def __post_init__(self):
        fp = getattr(self.model, "vocab_fingerprint_", None)
        if fp is not None and fp != self.vocabulary.fingerprint():
            raise VocabMismatch(
                f"expert {self.descriptor.dimension_id!r}: model fingerprint {fp} "
                f"does not match vocabulary fingerprint {self.vocabulary.fingerprint()}"
            )

    @property
    def dimension_id(self) -> str:
        return self.descriptor.dimension_id


@dataclass(frozen=True)
class DimensionResult:
    dimension_id: str
    score: int
    confidence: float
    feedback_text: str
    model_version: str

    def __post_init__(self):
        if self.score not in (0, 1, 2):
            raise ValueError(f"score must be 0, 1 or 2, got {self.score!r}")
        if not 0.0 <= self.confidence <= 1.0:
            raise ValueError(f"confidence must be in [0, 1], got {self.confidence!r}")

    def to_dict(self) -> dict:
        return {
            "dimension_id": self.dimension_id,
            "score": self.score,
            "confidence": self.confidence,
            "feedback_text": self.feedback_text,
            "model_version": self.model_version,
        }

    @classmethod
    def from_dict(cls, d: dict) -> "DimensionResult":
        return cls(
            dimension_id=d["dimension_id"],
            score=int(d["score"]),
            confidence=float(d["confidence"]),
            feedback_text=d["feedback_text"],
            model_version=d["model_version"],
        )


@dataclass(frozen=True)
class MasterObject:
    """The complete assessment of one essay: exactly one result per
    registered dimension plus the exact rational weighted final score."""

    essay_id: str
    results: Mapping[str, DimensionResult]
    final_score: Fraction
    produced_at: datetime
    model_manifest: tuple[tuple[str, str], ...]

    def __post_init__(self):
        object.__setattr__(self, "results", dict(sorted(self.results.items())))
        if not 0 <= self.final_score <= 2:
            raise ValueError(f"final_score must lie in [0, 2], got {self.final_score}")

    def to_dict(self) -> dict:
        return {
            "essay_id": self.essay_id,
            "results": {d: r.to_dict() for d, r in self.results.items()},
            "final_score": str(self.final_score),
            "produced_at": clock.isoformat(self.produced_at),
            "model_manifest": [list(pair) for pair in self.model_manifest],
        }

    @classmethod
    def from_dict(cls, d: dict) -> "MasterObject":
        return cls(
            essay_id=d["essay_id"],
            results={k: DimensionResult.from_dict(v) for k, v in d["results"].items()},
            final_score=Fraction(d["final_score"]),
            produced_at=clock.parse_instant(d["produced_at"]),
            model_manifest=tuple((a, b) for a, b in d["model_manifest"]),
        )


class ExpertRegistry:
    """Immutable collection of resolved experts, unique per dimension_id."""

    def __init__(self, experts: Sequence[ResolvedExpert]):
        if not experts:
            raise ValueError("registry requires at least one expert")
        by_id: dict[str, ResolvedExpert] = {}
        for expert in experts:
            if expert.dimension_id in by_id:
                raise DuplicateDimension(f"dimension_id {expert.dimension_id!r} registered twice")
            by_id[expert.dimension_id] = expert
        if sum(e.descriptor.weight for e in experts) == 0:
            raise AllZeroWeights("at least one expert must have a positive weight")
        self._experts = tuple(experts)
        self._by_id = by_id

    def __iter__(self) -> Iterator[ResolvedExpert]:
        return iter(self._experts)

    def __len__(self) -> int:
        return len(self._experts)

    def __getitem__(self, dimension_id: str) -> ResolvedExpert:
        return self._by_id[dimension_id]

    @property
    def dimension_ids(self) -> tuple[str, ...]:
        return tuple(e.dimension_id for e in self._experts)

    @property
    def descriptors(self) -> tuple[ExpertDescriptor, ...]:
        return tuple(e.descriptor for e in self._experts)

    def weight_of(self, dimension_id: str) -> Fraction:
        return self._by_id[dimension_id].descriptor.weight


ModelResolver = Callable[[str], tuple[ScoringModel, Vocabulary, str]]
TemplateResolver = Callable[[str], FeedbackTemplateSet]


def register_experts(descriptors: Sequence[ExpertDescriptor],
                     resolve_model: ModelResolver,
                     resolve_templates: TemplateResolver) -> ExpertRegistry:
    """Resolve every descriptor's model_ref and template_set_ref and build
    the immutable registry.  A model_ref the resolver cannot satisfy raises
    UnresolvableModel; an unloadable template set raises TemplateMissing."""
    if not descriptors:
        raise ValueError("descriptors must be non-empty")
    experts = []
    for desc in descriptors:
        try:
            model, vocabulary, model_version = resolve_model(desc.model_ref)
        except UnresolvableModel as exc:
            if exc.dimension_id is None:
                exc.dimension_id = desc.dimension_id
            raise
        except VocabMismatch:
            raise
        except Exception as exc:
            raise UnresolvableModel(
                f"model_ref {desc.model_ref!r} for dimension {desc.dimension_id!r}: {exc}",
                dimension_id=desc.dimension_id,
            ) from exc
        try:
            templates = resolve_templates(desc.template_set_ref)
        except TemplateMissing:
            raise
        except Exception as exc:
            raise TemplateMissing(
                f"template_set_ref {desc.template_set_ref!r} for dimension "
                f"{desc.dimension_id!r}: {exc}"
            ) from exc
        experts.append(
            ResolvedExpert(
                descriptor=desc,
                model=model,
                vocabulary=vocabulary,
                templates=templates,
                model_version=model_version,
            )
        )
    return ExpertRegistry(experts)


def assess(expert: ResolvedExpert, essay: NormalizedEssay) -> DimensionResult:
    """Score one dimension of one essay and render its feedback draft.

    Pure in (essay, model, templates): the same inputs always produce the
    same DimensionResult.  Terms outside the expert's vocabulary simply do
    not contribute; an essay with no in-vocabulary terms is still scored,
    from the model's priors and biases alone.
    """
    fv = vectorize(essay, expert.vocabulary)
    score, _ = expert.model.predict_one(fv)
    confidence = expert.model.confidence(fv)
    text = render_feedback(
        expert.templates,
        score,
        {
            "customer_name": essay.customer_name,
            "dimension_name": expert.descriptor.display_name,
        },
        essay.essay_id,
    )
    return DimensionResult(
        dimension_id=expert.dimension_id,
        score=score,
        confidence=confidence,
        feedback_text=text,
        model_version=expert.model_version,
    )


def aggregate(results: Mapping[str, DimensionResult], registry: ExpertRegistry) -> Fraction:
    """Exact weighted mean of per-dimension scores over the full registry.

    The result set must cover the registered dimensions exactly; rounding to
    decimals happens only at report rendering, never here.
    """
    registered = set(registry.dimension_ids)
    missing = sorted(registered - set(results))
    if missing:
        raise IncompleteResults(missing)
    extra = sorted(set(results) - registered)
    if extra:
        raise ValueError(f"results contain unregistered dimensions: {extra}")
    numerator = Fraction(0)
    denominator = Fraction(0)
    for dim in registry.dimension_ids:
        w = registry.weight_of(dim)
        numerator += w * results[dim].score
        denominator += w
    return numerator / denominator


# A scheduler runs the per-dimension thunks and returns, per dimension, the
# DimensionResult or the exception it raised.  Pipeline output must not
# depend on which scheduler ran the experts.
Scheduler = Callable[
    [Sequence[tuple[str, Callable[[], DimensionResult]]]],
    Mapping[str, "DimensionResult | Exception"],
]


def thread_scheduler(tasks: Sequence[tuple[str, Callable[[], DimensionResult]]]) -> dict:
    out: dict[str, DimensionResult | Exception] = {}
    with ThreadPoolExecutor(max_workers=max(1, len(tasks))) as pool:
        futures = {pool.submit(thunk): dim for dim, thunk in tasks}
        for fut in as_completed(futures):
            dim = futures[fut]
            try:
                out[dim] = fut.result()
            except Exception as exc:
                out[dim] = exc
    return out


def serial_scheduler(tasks: Sequence[tuple[str, Callable[[], DimensionResult]]]) -> dict:
    out: dict[str, DimensionResult | Exception] = {}
    for dim, thunk in tasks:
        try:
            out[dim] = thunk()
        except Exception as exc:
            out[dim] = exc
    return out


def reversed_scheduler(tasks: Sequence[tuple[str, Callable[[], DimensionResult]]]) -> dict:
    return serial_scheduler(list(reversed(list(tasks))))


def assemble(essay_id: str, results: Mapping[str, DimensionResult],
             registry: ExpertRegistry, produced_at: datetime | None = None) -> MasterObject:
    """Deterministic reduction of a complete result set into a MasterObject."""
    final = aggregate(results, registry)
    manifest = tuple(sorted((r.dimension_id, r.model_version) for r in results.values()))
    return MasterObject(
        essay_id=essay_id,
        results=results,
        final_score=final,
        produced_at=produced_at if produced_at is not None else clock.now(),
        model_manifest=manifest,
    )


def run_pipeline(raw: RawEssay, registry: ExpertRegistry, config: PreprocessConfig,
                 scheduler: Scheduler = thread_scheduler) -> MasterObject:
    """Normalize once, assess every registered dimension concurrently, and
    assemble the MasterObject.

    Any single expert failure fails the whole job as
    ExpertFailure(dimension_id, cause): a partial assessment is never
    returned.  The assembled object is identical for any execution order,
    which the scheduler parameter exists to let tests prove.
    """
    essay = normalize(raw, config)
    tasks = [
        (expert.dimension_id, (lambda e=expert: assess(e, essay)))
        for expert in registry
    ]
    outcomes = scheduler(tasks)
    failures = {dim: v for dim, v in outcomes.items() if isinstance(v, Exception)}
    if failures:
        dim = min(failures)
        raise ExpertFailure(dim, failures[dim])
    results = {dim: v for dim, v in outcomes.items()}
    return assemble(essay.essay_id, results, registry)
