"""Grading-job records and their review state machine.

One job is one essay moving through the product flow:

    RECEIVED -> SCORING -> AWAITING_REVIEW -> APPROVED -> REPORTED

plus FAIL from any state.  Six event kinds drive the machine (the edit event
loops on AWAITING_REVIEW); every other (state, event) pair is rejected with
IllegalTransition.  Each job is a directory holding a single canonical
record document, replaced atomically on every transition, with the full
event history embedded so the current record can be reconstructed by
replaying the log from the initial essay.
"""

from __future__ import annotations

import fcntl
import json
import uuid
from contextlib import contextmanager
from dataclasses import dataclass, field, replace
from datetime import datetime
from enum import Enum
from pathlib import Path

from .. import clock
from ..errors import IllegalTransition, UnknownJob
from ..experts import MasterObject
from ..preprocess import RawEssay
from .artifacts import _atomic_write

RECORD_NAME = "record.json"
LOCK_NAME = ".lock"


class JobState(str, Enum):
    RECEIVED = "RECEIVED"
    SCORING = "SCORING"
    AWAITING_REVIEW = "AWAITING_REVIEW"
    APPROVED = "APPROVED"
    REPORTED = "REPORTED"
    FAILED = "FAILED"


class JobEvent(str, Enum):
    START_SCORING = "start_scoring"
    SCORING_COMPLETE = "scoring_complete"
    EDIT_REVIEW = "edit_review"
    APPROVE = "approve"
    MARK_REPORTED = "mark_reported"
    FAIL = "fail"


EVENTS = tuple(JobEvent)

#: The five forward transitions; FAIL is handled separately (legal from any state).
_FORWARD: dict[tuple[JobState, JobEvent], JobState] = {
    (JobState.RECEIVED, JobEvent.START_SCORING): JobState.SCORING,
    (JobState.SCORING, JobEvent.SCORING_COMPLETE): JobState.AWAITING_REVIEW,
    (JobState.AWAITING_REVIEW, JobEvent.EDIT_REVIEW): JobState.AWAITING_REVIEW,
    (JobState.AWAITING_REVIEW, JobEvent.APPROVE): JobState.APPROVED,
    (JobState.APPROVED, JobEvent.MARK_REPORTED): JobState.REPORTED,
}


@dataclass(frozen=True)
class ReviewEdit:
    """Assessor override for one dimension; at least one field must be set."""

    score_override: int | None = None
    feedback_override: str | None = None

    def __post_init__(self):
        if self.score_override is None and self.feedback_override is None:
            raise ValueError("an edit must override the score, the feedback, or both")
        if self.score_override is not None and self.score_override not in (0, 1, 2):
            raise ValueError(f"score_override must be 0, 1 or 2, got {self.score_override!r}")

    def to_dict(self) -> dict:
        return {"score_override": self.score_override, "feedback_override": self.feedback_override}

    @classmethod
    def from_dict(cls, d: dict) -> "ReviewEdit":
        return cls(
            score_override=d.get("score_override"),
            feedback_override=d.get("feedback_override"),
        )


@dataclass(frozen=True)
class TransitionRecord:
    event: JobEvent
    from_state: JobState
    to_state: JobState
    at: datetime
    payload: dict

    def to_dict(self) -> dict:
        return {
            "event": self.event.value,
            "from_state": self.from_state.value,
            "to_state": self.to_state.value,
            "at": clock.isoformat(self.at),
            "payload": self.payload,
        }

    @classmethod
    def from_dict(cls, d: dict) -> "TransitionRecord":
        return cls(
            event=JobEvent(d["event"]),
            from_state=JobState(d["from_state"]),
            to_state=JobState(d["to_state"]),
            at=clock.parse_instant(d["at"]),
            payload=d["payload"],
        )


@dataclass(frozen=True)
class GradingJob:
    job_id: str
    essay: RawEssay
    state: JobState
    master: MasterObject | None = None
    review_edits: dict[str, ReviewEdit] = field(default_factory=dict)
    failure_cause: str | None = None
    approver_note: str | None = None
    created_at: datetime = field(default_factory=clock.now)
    updated_at: datetime = field(default_factory=clock.now)
    history: tuple[TransitionRecord, ...] = ()

    def to_dict(self) -> dict:
        return {
            "job_id": self.job_id,
            "essay": self.essay.to_dict(),
            "state": self.state.value,
            "master": self.master.to_dict() if self.master is not None else None,
            "review_edits": {d: e.to_dict() for d, e in sorted(self.review_edits.items())},
            "failure_cause": self.failure_cause,
            "approver_note": self.approver_note,
            "created_at": clock.isoformat(self.created_at),
            "updated_at": clock.isoformat(self.updated_at),
            "history": [t.to_dict() for t in self.history],
        }

    @classmethod
    def from_dict(cls, d: dict) -> "GradingJob":
        return cls(
            job_id=d["job_id"],
            essay=RawEssay.from_dict(d["essay"]),
            state=JobState(d["state"]),
            master=MasterObject.from_dict(d["master"]) if d["master"] is not None else None,
            review_edits={k: ReviewEdit.from_dict(v) for k, v in d["review_edits"].items()},
            failure_cause=d["failure_cause"],
            approver_note=d["approver_note"],
            created_at=clock.parse_instant(d["created_at"]),
            updated_at=clock.parse_instant(d["updated_at"]),
            history=tuple(TransitionRecord.from_dict(t) for t in d["history"]),
        )


def _normalize_payload(event: JobEvent, payload: dict | None) -> dict:
    """Coerce a caller payload into the JSON-safe form stored in history."""
    payload = dict(payload or {})
    if event is JobEvent.SCORING_COMPLETE:
        master = payload.get("master")
        if isinstance(master, MasterObject):
            payload["master"] = master.to_dict()
    elif event is JobEvent.EDIT_REVIEW:
        edits = payload.get("edits", {})
        payload["edits"] = {
            dim: (e.to_dict() if isinstance(e, ReviewEdit) else ReviewEdit.from_dict(e).to_dict())
            for dim, e in edits.items()
        }
    return payload


def apply_event(job: GradingJob, event: JobEvent, payload: dict | None,
                at: datetime) -> GradingJob:
    """Pure transition function: the entire state machine lives here, and
    replaying history through it reconstructs any job record exactly."""
    event = JobEvent(event)
    if event is JobEvent.FAIL:
        to_state = JobState.FAILED
    else:
        to_state = _FORWARD.get((job.state, event))
        if to_state is None:
            raise IllegalTransition(job.state.value, event.value)

    payload = _normalize_payload(event, payload)
    changes: dict = {}
    if event is JobEvent.SCORING_COMPLETE:
        if "master" not in payload:
            raise ValueError("scoring_complete requires a master payload")
        master = MasterObject.from_dict(payload["master"])
        if master.essay_id != job.essay.essay_id:
            raise ValueError(
                f"master is for essay {master.essay_id!r}, job holds {job.essay.essay_id!r}"
            )
        changes["master"] = master
    elif event is JobEvent.EDIT_REVIEW:
        edits = {dim: ReviewEdit.from_dict(e) for dim, e in payload["edits"].items()}
        assert job.master is not None  # guaranteed: state is AWAITING_REVIEW
        unknown = sorted(set(edits) - set(job.master.results))
        if unknown:
            raise ValueError(f"edits name dimensions absent from the assessment: {unknown}")
        changes["review_edits"] = edits
    elif event is JobEvent.APPROVE:
        changes["approver_note"] = payload.get("note")
    elif event is JobEvent.FAIL:
        if not payload.get("cause"):
            raise ValueError("fail requires a cause")
        changes["failure_cause"] = str(payload["cause"])

    record = TransitionRecord(
        event=event, from_state=job.state, to_state=to_state, at=at, payload=payload
    )
    return replace(
        job,
        state=to_state,
        updated_at=at,
        history=job.history + (record,),
        **changes,
    )


def replay(job_id: str, essay: RawEssay, created_at: datetime,
           history: tuple[TransitionRecord, ...]) -> GradingJob:
    """Rebuild a job from its initial submission plus the transition log."""
    job = GradingJob(
        job_id=job_id, essay=essay, state=JobState.RECEIVED,
        created_at=created_at, updated_at=created_at,
    )
    for record in history:
        job = apply_event(job, record.event, record.payload, record.at)
    return job


class JobStore:
    """Directory of job records: <root>/<job_id>/record.json.

    Every update rewrites the record atomically (temp file + rename), so a
    crash mid-write leaves the previous record intact.  Writers to one job
    serialize on an advisory lock file; reads never need the lock because
    the record file is replaced, never mutated in place.
    """

    def __init__(self, root: str | Path):
        self.root = Path(root)
        self.root.mkdir(parents=True, exist_ok=True)

    def _dir(self, job_id: str) -> Path:
        return self.root / job_id

    @contextmanager
    def _locked(self, job_id: str):
        lock_path = self._dir(job_id) / LOCK_NAME
        with open(lock_path, "a+b") as fh:
            fcntl.flock(fh.fileno(), fcntl.LOCK_EX)
            try:
                yield
            finally:
                fcntl.flock(fh.fileno(), fcntl.LOCK_UN)

    def _write(self, job: GradingJob) -> None:
        data = json.dumps(job.to_dict(), sort_keys=True, indent=2, ensure_ascii=False) + "\n"
        _atomic_write(self._dir(job.job_id) / RECORD_NAME, data.encode("utf-8"))

    def create_job(self, essay: RawEssay, job_id: str | None = None) -> GradingJob:
        if job_id is None:
            job_id = "j" + uuid.uuid4().hex[:12]
            while self._dir(job_id).exists():
                job_id = "j" + uuid.uuid4().hex[:12]
        elif self._dir(job_id).exists():
            raise ValueError(f"job {job_id!r} already exists")
        now = clock.now()
        job = GradingJob(
            job_id=job_id, essay=essay, state=JobState.RECEIVED,
            created_at=now, updated_at=now,
        )
        self._dir(job_id).mkdir(parents=True)
        self._write(job)
        return job

    def get_job(self, job_id: str) -> GradingJob:
        record = self._dir(job_id) / RECORD_NAME
        try:
            raw = record.read_text(encoding="utf-8")
        except FileNotFoundError:
            raise UnknownJob(f"no job {job_id!r}") from None
        return GradingJob.from_dict(json.loads(raw))

    def transition(self, job_id: str, event: JobEvent, payload: dict | None = None) -> GradingJob:
        if not self._dir(job_id).exists():
            raise UnknownJob(f"no job {job_id!r}")
        with self._locked(job_id):
            job = self.get_job(job_id)
            job = apply_event(job, event, payload, clock.now())
            self._write(job)
            return job

    def list_jobs(self, state: JobState | None = None) -> list[GradingJob]:
        """All jobs (optionally one state), newest first."""
        jobs = []
        for d in self.root.iterdir() if self.root.is_dir() else ():
            if (d / RECORD_NAME).is_file():
                job = self.get_job(d.name)
                if state is None or job.state is state:
                    jobs.append(job)
        jobs.sort(key=lambda j: (j.created_at, j.job_id), reverse=True)
        return jobs
