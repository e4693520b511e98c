"""Exception hierarchy shared by all rubric modules."""

from __future__ import annotations


class RubricError(Exception):
    """Base class for every error raised by this package."""

    code = "rubric_error"


# --- preprocessing ---------------------------------------------------------


class EmptyEssay(RubricError):
    """Essay body contains no non-whitespace character."""

    code = "empty_essay"


class EmptyAfterNormalization(RubricError):
    """No token survived normalization; the essay is ungradeable."""

    code = "empty_after_normalization"


# --- features --------------------------------------------------------------


class EmptyVocabulary(RubricError):
    """No term survived the document-frequency band filter."""

    code = "empty_vocabulary"


# --- classifiers -----------------------------------------------------------


class InvalidFeatures(RubricError):
    """Feature vectors are incompatible with the classifier (e.g. fractional
    weights fed to multinomial naive Bayes)."""

    code = "invalid_features"


class VocabMismatch(RubricError):
    """Feature vector or vocabulary does not match the model it is used with."""

    code = "vocab_mismatch"


class DegenerateData(RubricError):
    """Training data does not contain enough distinct labels."""

    code = "degenerate_data"


class InfeasibleStratification(RubricError):
    """Some class has fewer examples than the requested fold count."""

    code = "infeasible_stratification"


# --- experts / pipeline ----------------------------------------------------


class DuplicateDimension(RubricError):
    code = "duplicate_dimension"


class UnresolvableModel(RubricError):
    """A registry descriptor references a model that cannot be loaded."""

    code = "unresolvable_model"

    def __init__(self, message: str, dimension_id: str | None = None):
        self.dimension_id = dimension_id
        super().__init__(message)


class AllZeroWeights(RubricError):
    code = "all_zero_weights"


class IncompleteResults(RubricError):
    """Aggregation was asked to run over a result set that does not cover the
    registry; carries the missing dimension ids."""

    code = "incomplete_results"

    def __init__(self, missing: list[str]):
        self.missing = list(missing)
        super().__init__(f"missing dimension results: {', '.join(self.missing)}")


class ExpertFailure(RubricError):
    """One expert failed; the whole grading job fails, naming the dimension."""

    code = "expert_failure"

    def __init__(self, dimension_id: str, cause: BaseException):
        self.dimension_id = dimension_id
        self.cause = cause
        super().__init__(f"expert {dimension_id} failed: {cause}")


# --- feedback --------------------------------------------------------------


class TemplateMissing(RubricError):
    """No feedback template exists for a (dimension, score) pair."""

    code = "template_missing"


class UnknownPlaceholder(RubricError):
    """A template references a placeholder outside the declared set."""

    code = "unknown_placeholder"


# --- store -----------------------------------------------------------------


class ChecksumMismatch(RubricError):
    code = "checksum_mismatch"


class UnsupportedFormatVersion(RubricError):
    code = "unsupported_format_version"


class IoFailure(RubricError):
    code = "io_failure"


class IllegalTransition(RubricError):
    """Job state machine rejected an event in the current state."""

    code = "illegal_transition"

    def __init__(self, state: str, event: str):
        self.state = state
        self.event = event
        super().__init__(f"event {event!r} is illegal in state {state!r}")


class UnknownJob(RubricError):
    code = "unknown_job"


# --- reporting -------------------------------------------------------------


class NotApproved(RubricError):
    """Report requested for a job that has not been approved."""

    code = "not_approved"


class RenderFailure(RubricError):
    code = "render_failure"
