"""Rubric-based essay scoring and feedback.

An essay is normalized once, scored 0/1/2 on each rubric dimension by an
independent classifier expert, given templated feedback per dimension, and
aggregated into an exact weighted final score.  A human assessor reviews,
optionally overrides, and approves before the customer report is rendered.
Offline training, a grading CLI and an HTTP review service all share this
one pipeline.
"""

from .classifiers import (
    CellResult,
    EvalReport,
    GridSearchResult,
    GridSearchSpec,
    LabeledExample,
    Metric,
    MultinomialNaiveBayes,
    PegasosSvm,
    default_grid_spec,
    evaluate,
    grid_search,
    train_cell,
)
from .errors import RubricError
from .experts import (
    DimensionResult,
    ExpertDescriptor,
    ExpertRegistry,
    MasterObject,
    ResolvedExpert,
    aggregate,
    assess,
    register_experts,
    run_pipeline,
)
from .features import (
    BowVectorizer,
    FeatureConfig,
    FeatureVector,
    Vocabulary,
    Weighting,
    build_vocabulary,
    vectorize,
)
from .feedback import (
    FeedbackTemplateSet,
    render_feedback,
    validate_template_set,
)
from .preprocess import (
    EssayNormalizer,
    NormalizedEssay,
    PreprocessConfig,
    RawEssay,
    default_config,
    normalize,
)
from .reporting import Report, ReportFormat, assemble_report, render_report
from .store import (
    GradingJob,
    JobEvent,
    JobState,
    JobStore,
    ModelStore,
    load_model,
    save_model,
)
from .synth import GeneratorSpec, default_generator_spec, generate

__version__ = "0.1.0"

__all__ = [
    "BowVectorizer",
    "CellResult",
    "DimensionResult",
    "EssayNormalizer",
    "EvalReport",
    "ExpertDescriptor",
    "ExpertRegistry",
    "FeatureConfig",
    "FeatureVector",
    "FeedbackTemplateSet",
    "GeneratorSpec",
    "GradingJob",
    "GridSearchResult",
    "GridSearchSpec",
    "JobEvent",
    "JobState",
    "JobStore",
    "LabeledExample",
    "MasterObject",
    "Metric",
    "ModelStore",
    "MultinomialNaiveBayes",
    "NormalizedEssay",
    "PegasosSvm",
    "PreprocessConfig",
    "RawEssay",
    "Report",
    "ReportFormat",
    "ResolvedExpert",
    "RubricError",
    "Vocabulary",
    "Weighting",
    "aggregate",
    "assemble_report",
    "assess",
    "build_vocabulary",
    "default_config",
    "default_generator_spec",
    "default_grid_spec",
    "evaluate",
    "generate",
    "grid_search",
    "load_model",
    "normalize",
    "register_experts",
    "render_feedback",
    "render_report",
    "run_pipeline",
    "save_model",
    "train_cell",
    "validate_template_set",
    "vectorize",
]
