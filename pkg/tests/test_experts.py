"""Expert registry, per-dimension assessment, exact aggregation, and
scheduling-order independence of the assembled MasterObject."""

from __future__ import annotations

import json
from fractions import Fraction

import pytest
from hypothesis import given
from hypothesis import strategies as st

from rubric import clock
from rubric.classifiers import MultinomialNaiveBayes
from rubric.errors import (
    AllZeroWeights,
    DuplicateDimension,
    ExpertFailure,
    IncompleteResults,
    TemplateMissing,
    UnresolvableModel,
    VocabMismatch,
)
from rubric.experts import (
    DimensionResult,
    ExpertDescriptor,
    ExpertRegistry,
    MasterObject,
    ResolvedExpert,
    aggregate,
    assemble,
    assess,
    register_experts,
    reversed_scheduler,
    run_pipeline,
    serial_scheduler,
    thread_scheduler,
)
from rubric.features import FeatureConfig, build_vocabulary
from rubric.feedback import FeedbackTemplateSet, default_template_set
from rubric.preprocess import NormalizedEssay, PreprocessConfig, Token

from .conftest import make_raw

# Keyword the expert learns for each score; one expert per dimension below.
DIM_KEYWORDS = {
    "d01": {"murky": 0, "plain": 1, "lucid": 2},
    "d02": {"raw": 0, "fair": 1, "sharp": 2},
    "d03": {"thin": 0, "firm": 1, "deep": 2},
}


def essay_of(tokens: list[str], essay_id: str = "e1", customer_name: str = "Ana Sol") -> NormalizedEssay:
    return NormalizedEssay(
        essay_id=essay_id,
        customer_name=customer_name,
        tokens=tuple(Token(t) for t in tokens),
        original_char_count=len(" ".join(tokens)) or 1,
    )


def trained_expert(dimension_id: str, weight=1) -> ResolvedExpert:
    keywords = DIM_KEYWORDS[dimension_id]
    docs = [essay_of([word] * 3, essay_id=f"t{i}") for i, word in enumerate(keywords)]
    labels = list(keywords.values())
    vocab = build_vocabulary(docs, FeatureConfig())
    from rubric.features import vectorize

    model = MultinomialNaiveBayes(alpha=1.0).fit(
        [vectorize(d, vocab) for d in docs], labels, vocabulary=vocab
    )
    descriptor = ExpertDescriptor(
        dimension_id=dimension_id,
        display_name=f"Dimension {dimension_id}",
        weight=Fraction(weight),
        model_ref=f"{dimension_id}/v1",
        template_set_ref=f"{dimension_id}.json",
    )
    return ResolvedExpert(
        descriptor=descriptor,
        model=model,
        vocabulary=vocab,
        templates=default_template_set(dimension_id, f"Dimension {dimension_id}"),
        model_version="vtest",
    )


def registry_of(*weights) -> ExpertRegistry:
    dims = list(DIM_KEYWORDS)[: len(weights)]
    return ExpertRegistry([trained_expert(d, w) for d, w in zip(dims, weights)])


def result_of(dim: str, score: int) -> DimensionResult:
    return DimensionResult(
        dimension_id=dim, score=score, confidence=0.9,
        feedback_text="text", model_version="vtest",
    )


# --- descriptors and registry ----------------------------------------------------


def test_descriptor_weight_coercion_and_serialization():
    d = ExpertDescriptor("d01", "Clarity", weight="1/3",
                         model_ref="d01/v1", template_set_ref="d01.json")
    assert d.weight == Fraction(1, 3)
    assert d.to_dict()["weight"] == "1/3"
    assert ExpertDescriptor.from_dict(d.to_dict()) == d


def test_descriptor_rejects_negative_weight():
    with pytest.raises(ValueError):
        ExpertDescriptor("d01", "x", weight=Fraction(-1), model_ref="m", template_set_ref="t")


def test_registry_rejects_duplicates_and_zero_weights():
    expert = trained_expert("d01")
    with pytest.raises(DuplicateDimension):
        ExpertRegistry([expert, trained_expert("d01")])
    with pytest.raises(AllZeroWeights):
        ExpertRegistry([trained_expert("d01", weight=0)])


def test_registry_lookup():
    registry = registry_of(2, 1)
    assert registry.dimension_ids == ("d01", "d02")
    assert registry.weight_of("d01") == Fraction(2)
    assert len(registry) == 2


def test_resolved_expert_fingerprint_check():
    expert = trained_expert("d01")
    other_vocab = build_vocabulary([essay_of(["unrelated"])], FeatureConfig())
    with pytest.raises(VocabMismatch):
        ResolvedExpert(
            descriptor=expert.descriptor,
            model=expert.model,
            vocabulary=other_vocab,
            templates=expert.templates,
            model_version="vtest",
        )


def test_register_experts_resolver_paths():
    experts = {d: trained_expert(d) for d in ("d01", "d02")}

    def resolve_model(ref):
        dim = ref.split("/")[0]
        if dim not in experts:
            raise KeyError(ref)
        e = experts[dim]
        return e.model, e.vocabulary, "v1"

    def resolve_templates(ref):
        return default_template_set(ref.removesuffix(".json"))

    descriptors = [experts[d].descriptor for d in ("d01", "d02")]
    registry = register_experts(descriptors, resolve_model, resolve_templates)
    assert registry.dimension_ids == ("d01", "d02")

    bad = ExpertDescriptor("d09", "x", weight=1, model_ref="d09/v1", template_set_ref="d09.json")
    with pytest.raises(UnresolvableModel) as exc_info:
        register_experts([bad], resolve_model, resolve_templates)
    assert exc_info.value.dimension_id == "d09"

    def broken_templates(ref):
        raise FileNotFoundError(ref)

    with pytest.raises(TemplateMissing):
        register_experts(descriptors[:1], resolve_model, broken_templates)


# --- assess --------------------------------------------------------------------------


def test_assess_scores_by_keyword():
    expert = trained_expert("d01")
    for word, score in DIM_KEYWORDS["d01"].items():
        result = assess(expert, essay_of([word, word]))
        assert result.score == score
        assert result.dimension_id == "d01"
        assert result.model_version == "vtest"
        assert 0.0 < result.confidence <= 1.0


def test_assess_renders_feedback_with_context():
    expert = trained_expert("d01")
    result = assess(expert, essay_of(["lucid"], customer_name="Ana Sol"))
    assert "Ana Sol" in result.feedback_text
    assert "Dimension d01" in result.feedback_text


def test_assess_is_pure():
    expert = trained_expert("d02")
    essay = essay_of(["sharp", "words"])
    assert assess(expert, essay) == assess(expert, essay)


def test_assess_oov_essay_still_scored():
    expert = trained_expert("d01")
    result = assess(expert, essay_of(["entirely", "unknown", "words"]))
    assert result.score in (0, 1, 2)


# --- aggregate ------------------------------------------------------------------------


def test_weighted_mean_hand_example():
    # weights (2,1,1) and scores (2,0,1): (4+0+1)/4 = 5/4
    registry = registry_of(2, 1, 1)
    results = {"d01": result_of("d01", 2), "d02": result_of("d02", 0), "d03": result_of("d03", 1)}
    assert aggregate(results, registry) == Fraction(5, 4)


def test_aggregate_missing_dimension():
    registry = registry_of(1, 1)
    with pytest.raises(IncompleteResults) as exc_info:
        aggregate({"d01": result_of("d01", 1)}, registry)
    assert "d02" in str(exc_info.value)


def test_aggregate_extra_dimension_rejected():
    registry = registry_of(1)
    results = {"d01": result_of("d01", 1), "dXX": result_of("dXX", 2)}
    with pytest.raises(ValueError):
        aggregate(results, registry)


def test_zero_weight_dimension_has_no_effect():
    registry = registry_of(1, 0, 1)
    base = {"d01": result_of("d01", 2), "d02": result_of("d02", 0), "d03": result_of("d03", 1)}
    flipped = dict(base)
    flipped["d02"] = result_of("d02", 2)
    assert aggregate(base, registry) == aggregate(flipped, registry) == Fraction(3, 2)


WEIGHTS = st.lists(st.integers(min_value=0, max_value=9), min_size=1, max_size=8)


@given(WEIGHTS, st.data())
def test_aggregate_matches_rational_oracle(weights, data):
    if sum(weights) == 0:
        weights[0] = 1
    dims = [f"d{i:02d}" for i in range(1, len(weights) + 1)]
    scores = [data.draw(st.integers(min_value=0, max_value=2)) for _ in dims]

    experts = []
    template = trained_expert("d01")
    for dim, w in zip(dims, weights):
        desc = ExpertDescriptor(dim, dim, weight=Fraction(w), model_ref="m", template_set_ref="t")
        experts.append(ResolvedExpert(
            descriptor=desc, model=template.model, vocabulary=template.vocabulary,
            templates=template.templates, model_version="v",
        ))
    registry = ExpertRegistry(experts)
    results = {d: result_of(d, s) for d, s in zip(dims, scores)}

    expected = sum(Fraction(w) * s for w, s in zip(weights, scores)) / sum(
        Fraction(w) for w in weights
    )
    got = aggregate(results, registry)
    assert got == expected
    assert 0 <= got <= 2


@given(WEIGHTS, st.data())
def test_raising_a_positive_weight_score_never_lowers_final(weights, data):
    if sum(weights) == 0:
        weights[0] = 1
    dims = [f"d{i:02d}" for i in range(1, len(weights) + 1)]
    scores = [data.draw(st.integers(min_value=0, max_value=1)) for _ in dims]
    bump = data.draw(st.integers(min_value=0, max_value=len(dims) - 1))

    def mean(ss):
        return sum(Fraction(w) * s for w, s in zip(weights, ss)) / sum(Fraction(w) for w in weights)

    bumped = list(scores)
    bumped[bump] += 1
    if weights[bump] == 0:
        assert mean(bumped) == mean(scores)
    else:
        assert mean(bumped) > mean(scores)


# --- assemble and serialization ---------------------------------------------------------


def test_assemble_sorts_results_and_manifest():
    registry = registry_of(1, 1, 1)
    results = {"d03": result_of("d03", 1), "d01": result_of("d01", 2), "d02": result_of("d02", 0)}
    produced = clock.parse_instant("2025-07-01T12:00:00Z")
    master = assemble("e9", results, registry, produced_at=produced)
    assert list(master.results) == ["d01", "d02", "d03"]
    assert master.model_manifest == (("d01", "vtest"), ("d02", "vtest"), ("d03", "vtest"))
    assert master.final_score == Fraction(1)
    assert master.to_dict()["final_score"] == "1"
    assert master.to_dict()["produced_at"] == "2025-07-01T12:00:00Z"


def test_master_object_dict_round_trip():
    registry = registry_of(2, 1)
    results = {"d01": result_of("d01", 2), "d02": result_of("d02", 1)}
    master = assemble("e1", results, registry, produced_at=clock.parse_instant("2025-07-01T00:00:00Z"))
    back = MasterObject.from_dict(master.to_dict())
    assert back == master
    assert back.final_score == Fraction(5, 3)


def test_master_object_rational_final_score_serialized_as_string():
    registry = registry_of(1, 1, 1)
    results = {d: result_of(d, s) for d, s in zip(("d01", "d02", "d03"), (2, 0, 0))}
    master = assemble("e1", results, registry, produced_at=clock.now())
    d = master.to_dict()
    assert d["final_score"] == "2/3"
    json.dumps(d)  # JSON-serializable throughout


# --- run_pipeline ---------------------------------------------------------------------


def test_pipeline_end_to_end(fixed_time):
    registry = registry_of(2, 1, 1)
    raw = make_raw(body="Lucid and sharp but thin overall")
    master = run_pipeline(raw, registry, PreprocessConfig())
    assert master.essay_id == raw.essay_id
    assert set(master.results) == {"d01", "d02", "d03"}
    assert master.results["d01"].score == 2
    assert master.results["d02"].score == 2
    assert master.results["d03"].score == 0
    assert master.final_score == Fraction(2 * 2 + 2 + 0, 4)


def test_pipeline_identical_across_schedulers(fixed_time):
    registry = registry_of(2, 1, 1)
    raw = make_raw(body="Plain but fair and deep thoughts")
    outputs = [
        json.dumps(run_pipeline(raw, registry, PreprocessConfig(), scheduler=s).to_dict(),
                   sort_keys=True)
        for s in (thread_scheduler, serial_scheduler, reversed_scheduler)
    ]
    assert outputs[0] == outputs[1] == outputs[2]


def test_pipeline_expert_failure_names_smallest_dimension():
    registry = registry_of(1, 1, 1)

    def failing_scheduler(tasks):
        out = {}
        for dim, thunk in tasks:
            out[dim] = RuntimeError(f"boom {dim}") if dim in ("d02", "d03") else thunk()
        return out

    raw = make_raw(body="Plain fair firm")
    with pytest.raises(ExpertFailure) as exc_info:
        run_pipeline(raw, registry, PreprocessConfig(), scheduler=failing_scheduler)
    assert exc_info.value.dimension_id == "d02"


def test_pipeline_normalizes_once_with_config():
    registry = registry_of(1)
    raw = make_raw(body="The murky draft")
    config = PreprocessConfig(stopwords=frozenset({"the", "draft"}))
    master = run_pipeline(raw, registry, config)
    assert master.results["d01"].score == 0
