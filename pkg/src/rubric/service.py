"""HTTP grading service: submit essays, poll jobs, review, approve, report.

Scoring always runs off the request path: POST /v1/essays returns 202 with
a job id immediately and a bounded worker pool scores the job in the
background, so no handler ever holds a connection for the duration of a
scoring run regardless of how slow scoring is.  Clients poll GET
/v1/jobs/{id} until the job reaches AWAITING_REVIEW, then drive the review
endpoints.  All errors use one body shape: {code, message, dimension_id?}.
"""

from __future__ import annotations

import queue
import threading
import time
import uuid
from contextlib import asynccontextmanager

from fastapi import FastAPI, Request, Response
from fastapi.responses import JSONResponse
from pydantic import BaseModel, Field

from . import clock
from .config import ServiceConfig, load_registry
from .errors import (
    ExpertFailure,
    IllegalTransition,
    NotApproved,
    RubricError,
    UnknownJob,
)
from .experts import ExpertRegistry, run_pipeline
from .preprocess import RawEssay, default_config
from .reporting import ReportFormat, assemble_report, render_report, round_half_up_2dp
from .store.jobs import GradingJob, JobEvent, JobState, JobStore, ReviewEdit

_STATUS_BY_ERROR: dict[type, int] = {
    UnknownJob: 404,
    IllegalTransition: 409,
    NotApproved: 409,
}


class EssaySubmission(BaseModel):
    customer_name: str
    body: str
    essay_id: str | None = None
    submitted_at: str | None = None


class EditBody(BaseModel):
    score_override: int | None = None
    feedback_override: str | None = None


class ReviewBody(BaseModel):
    edits: dict[str, EditBody] = Field(default_factory=dict)


class ApproveBody(BaseModel):
    note: str | None = None


def _error_response(status: int, code: str, message: str,
                    dimension_id: str | None = None) -> JSONResponse:
    body: dict = {"code": code, "message": message}
    if dimension_id is not None:
        body["dimension_id"] = dimension_id
    return JSONResponse(status_code=status, content=body)


def _job_view(job: GradingJob) -> dict:
    view = {
        "job_id": job.job_id,
        "state": job.state.value,
        "essay": job.essay.to_dict(),
        "master": job.master.to_dict() if job.master is not None else None,
        "review_edits": {d: e.to_dict() for d, e in sorted(job.review_edits.items())},
        "failure_cause": job.failure_cause,
        "approver_note": job.approver_note,
        "created_at": clock.isoformat(job.created_at),
        "updated_at": clock.isoformat(job.updated_at),
    }
    if job.master is not None:
        view["final_score_display"] = round_half_up_2dp(job.master.final_score)
    return view


def _job_summary(job: GradingJob) -> dict:
    return {
        "job_id": job.job_id,
        "state": job.state.value,
        "essay_id": job.essay.essay_id,
        "customer_name": job.essay.customer_name,
        "created_at": clock.isoformat(job.created_at),
        "updated_at": clock.isoformat(job.updated_at),
    }


class _ScoringWorkers:
    """Bounded pool of scoring threads fed by an in-process queue."""

    def __init__(self, config: ServiceConfig, store: JobStore, registry: ExpertRegistry):
        self._config = config
        self._store = store
        self._registry = registry
        self._queue: queue.Queue[str | None] = queue.Queue()
        self._stop = threading.Event()
        self._threads: list[threading.Thread] = []

    def start(self) -> None:
        for i in range(self._config.worker_count):
            t = threading.Thread(target=self._run, name=f"scoring-worker-{i}", daemon=True)
            t.start()
            self._threads.append(t)

    def stop(self) -> None:
        self._stop.set()
        for _ in self._threads:
            self._queue.put(None)
        for t in self._threads:
            t.join(timeout=10)

    def submit(self, job_id: str) -> None:
        self._queue.put(job_id)

    def _delay(self) -> None:
        deadline = time.monotonic() + self._config.scoring_delay_seconds
        while not self._stop.is_set() and time.monotonic() < deadline:
            time.sleep(min(0.01, deadline - time.monotonic()))

    def _run(self) -> None:
        preprocess = default_config()
        while True:
            job_id = self._queue.get()
            if job_id is None:
                return
            try:
                job = self._store.transition(job_id, JobEvent.START_SCORING)
                if self._config.scoring_delay_seconds > 0:
                    self._delay()
                master = run_pipeline(job.essay, self._registry, preprocess)
                self._store.transition(job_id, JobEvent.SCORING_COMPLETE, {"master": master})
            except ExpertFailure as exc:
                self._fail(job_id, f"dimension {exc.dimension_id}: {exc.cause}")
            except Exception as exc:
                self._fail(job_id, f"{type(exc).__name__}: {exc}")

    def _fail(self, job_id: str, cause: str) -> None:
        try:
            self._store.transition(job_id, JobEvent.FAIL, {"cause": cause})
        except RubricError:
            pass  # the job is already terminal; nothing better to record


def create_app(config: ServiceConfig) -> FastAPI:
    if not config.models_dir.is_dir():
        raise ValueError(f"models_dir {config.models_dir} is not a directory")
    if not config.registry_file.is_file():
        raise ValueError(f"registry_file {config.registry_file} is not a file")
    registry = load_registry(config.registry_file, config.models_dir)
    store = JobStore(config.store_dir)
    workers = _ScoringWorkers(config, store, registry)

    @asynccontextmanager
    async def lifespan(_: FastAPI):
        workers.start()
        try:
            yield
        finally:
            workers.stop()

    app = FastAPI(title="rubric scoring service", lifespan=lifespan)
    app.state.config = config
    app.state.registry = registry
    app.state.store = store
    app.state.workers = workers

    @app.exception_handler(RubricError)
    async def _rubric_error(request: Request, exc: RubricError):
        status = _STATUS_BY_ERROR.get(type(exc), 500)
        dimension_id = getattr(exc, "dimension_id", None)
        return _error_response(status, exc.code, str(exc), dimension_id)

    @app.exception_handler(ValueError)
    async def _value_error(request: Request, exc: ValueError):
        return _error_response(422, "invalid_request", str(exc))

    @app.get("/healthz")
    async def healthz():
        return {"status": "ok"}

    @app.post("/v1/essays", status_code=202)
    async def submit_essay(submission: EssaySubmission):
        essay = RawEssay(
            essay_id=submission.essay_id or "e" + uuid.uuid4().hex[:12],
            customer_name=submission.customer_name,
            submitted_at=(
                clock.parse_instant(submission.submitted_at)
                if submission.submitted_at
                else clock.now()
            ),
            body=submission.body,
        )
        job = store.create_job(essay)
        workers.submit(job.job_id)
        return {"job_id": job.job_id, "state": job.state.value}

    @app.get("/v1/jobs")
    async def list_jobs(state: str | None = None, limit: int = 50, offset: int = 0):
        state_filter = None
        if state is not None:
            try:
                state_filter = JobState(state.upper())
            except ValueError:
                return _error_response(422, "invalid_request", f"unknown state {state!r}")
        jobs = store.list_jobs(state_filter)
        window = jobs[offset : offset + max(0, limit)]
        return {"jobs": [_job_summary(j) for j in window], "total": len(jobs)}

    @app.get("/v1/jobs/{job_id}")
    async def get_job(job_id: str):
        return _job_view(store.get_job(job_id))

    @app.put("/v1/jobs/{job_id}/review")
    async def put_review(job_id: str, body: ReviewBody):
        job = store.get_job(job_id)
        if job.master is not None:
            for dim in body.edits:
                if dim not in job.master.results:
                    return _error_response(
                        422, "unknown_dimension",
                        f"dimension {dim!r} is not part of this assessment", dim,
                    )
        try:
            edits = {
                dim: ReviewEdit(
                    score_override=e.score_override,
                    feedback_override=e.feedback_override,
                )
                for dim, e in body.edits.items()
            }
        except ValueError as exc:
            return _error_response(422, "invalid_edit", str(exc))
        job = store.transition(job_id, JobEvent.EDIT_REVIEW, {"edits": edits})
        return _job_view(job)

    @app.post("/v1/jobs/{job_id}/approve")
    async def approve(job_id: str, body: ApproveBody | None = None):
        note = body.note if body is not None else None
        job = store.transition(job_id, JobEvent.APPROVE, {"note": note})
        report = assemble_report(job, registry)
        view = _job_view(job)
        view["final_score"] = str(report.final_score)
        view["final_score_display"] = report.final_score_display
        return view

    @app.get("/v1/jobs/{job_id}/report")
    async def get_report(job_id: str, format: str = "structured"):
        try:
            fmt = ReportFormat(format.upper())
        except ValueError:
            return _error_response(422, "invalid_request", f"unknown format {format!r}")
        job = store.get_job(job_id)
        report = assemble_report(job, registry)  # NotApproved -> 409
        payload = render_report(report, fmt)
        if job.state is JobState.APPROVED:
            store.transition(job_id, JobEvent.MARK_REPORTED)
        media = "application/json" if fmt is ReportFormat.STRUCTURED else "text/html; charset=utf-8"
        return Response(content=payload, media_type=media)

    return app
