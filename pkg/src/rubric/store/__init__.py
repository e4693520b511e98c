"""On-disk persistence: immutable versioned model artifacts and grading-job
records with a reviewed-approval state machine."""

from .artifacts import (
    ARTIFACT_SUFFIX,
    FORMAT_VERSION,
    MAGIC,
    LoadedModel,
    ModelStore,
    load_model,
    save_model,
)
from .jobs import (
    EVENTS,
    GradingJob,
    JobEvent,
    JobState,
    JobStore,
    ReviewEdit,
    TransitionRecord,
    apply_event,
    replay,
)

__all__ = [
    "ARTIFACT_SUFFIX",
    "FORMAT_VERSION",
    "MAGIC",
    "LoadedModel",
    "ModelStore",
    "load_model",
    "save_model",
    "EVENTS",
    "GradingJob",
    "JobEvent",
    "JobState",
    "JobStore",
    "ReviewEdit",
    "TransitionRecord",
    "apply_event",
    "replay",
]
