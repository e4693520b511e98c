"""Grading jobs: state machine legality, replay, durability, locking."""

from __future__ import annotations

import json
import os
from concurrent.futures import ThreadPoolExecutor
from fractions import Fraction

import pytest

from rubric import clock
from rubric.errors import IllegalTransition, IoFailure, UnknownJob
from rubric.experts import DimensionResult, MasterObject
from rubric.store import (
    GradingJob,
    JobEvent,
    JobState,
    JobStore,
    ReviewEdit,
    apply_event,
    replay,
)

from .conftest import FIXED_TIME, make_raw

AT = clock.parse_instant(FIXED_TIME)

LEGAL = {
    (JobState.RECEIVED, JobEvent.START_SCORING),
    (JobState.SCORING, JobEvent.SCORING_COMPLETE),
    (JobState.AWAITING_REVIEW, JobEvent.EDIT_REVIEW),
    (JobState.AWAITING_REVIEW, JobEvent.APPROVE),
    (JobState.APPROVED, JobEvent.MARK_REPORTED),
} | {(state, JobEvent.FAIL) for state in JobState}


def master_for(essay_id: str) -> MasterObject:
    results = {
        dim: DimensionResult(
            dimension_id=dim, score=score, confidence=0.8,
            feedback_text=f"feedback for {dim}", model_version="vdeadbeefdeadbeef",
        )
        for dim, score in (("d01", 2), ("d02", 1))
    }
    return MasterObject(
        essay_id=essay_id, results=results, final_score=Fraction(3, 2),
        produced_at=AT, model_manifest=(("d01", "vdeadbeefdeadbeef"), ("d02", "vdeadbeefdeadbeef")),
    )


def job_in(state: JobState) -> GradingJob:
    essay = make_raw()
    master = master_for(essay.essay_id) if state is not JobState.RECEIVED else None
    return GradingJob(
        job_id="j0", essay=essay, state=state, master=master,
        created_at=AT, updated_at=AT,
    )


def payload_for(event: JobEvent, essay_id: str) -> dict | None:
    if event is JobEvent.SCORING_COMPLETE:
        return {"master": master_for(essay_id)}
    if event is JobEvent.FAIL:
        return {"cause": "expert failure"}
    return None


# --- transition legality ------------------------------------------------------------


def test_every_state_event_pair_matches_the_legal_set():
    for state in JobState:
        for event in JobEvent:
            job = job_in(state)
            payload = payload_for(event, job.essay.essay_id)
            if (state, event) in LEGAL:
                updated = apply_event(job, event, payload, AT)
                assert isinstance(updated, GradingJob)
            else:
                with pytest.raises(IllegalTransition):
                    apply_event(job, event, payload, AT)


def test_forward_chain_reaches_reported():
    job = job_in(JobState.RECEIVED)
    job = apply_event(job, JobEvent.START_SCORING, None, AT)
    assert job.state is JobState.SCORING
    job = apply_event(job, JobEvent.SCORING_COMPLETE,
                      {"master": master_for(job.essay.essay_id)}, AT)
    assert job.state is JobState.AWAITING_REVIEW
    assert job.master is not None
    job = apply_event(job, JobEvent.EDIT_REVIEW,
                      {"edits": {"d01": ReviewEdit(score_override=1)}}, AT)
    assert job.state is JobState.AWAITING_REVIEW
    job = apply_event(job, JobEvent.APPROVE, {"note": "looks right"}, AT)
    assert job.state is JobState.APPROVED
    assert job.approver_note == "looks right"
    job = apply_event(job, JobEvent.MARK_REPORTED, None, AT)
    assert job.state is JobState.REPORTED
    assert len(job.history) == 5


def test_fail_records_cause_from_every_state():
    for state in JobState:
        job = apply_event(job_in(state), JobEvent.FAIL, {"cause": "boom"}, AT)
        assert job.state is JobState.FAILED
        assert job.failure_cause == "boom"


def test_fail_without_cause_rejected():
    with pytest.raises(ValueError):
        apply_event(job_in(JobState.SCORING), JobEvent.FAIL, {}, AT)


def test_scoring_complete_requires_matching_master():
    job = job_in(JobState.SCORING)
    with pytest.raises(ValueError):
        apply_event(job, JobEvent.SCORING_COMPLETE, {}, AT)
    with pytest.raises(ValueError):
        apply_event(job, JobEvent.SCORING_COMPLETE, {"master": master_for("e9999")}, AT)


def test_edit_review_replaces_previous_edits():
    job = job_in(JobState.AWAITING_REVIEW)
    job = apply_event(job, JobEvent.EDIT_REVIEW,
                      {"edits": {"d01": ReviewEdit(score_override=0)}}, AT)
    job = apply_event(job, JobEvent.EDIT_REVIEW,
                      {"edits": {"d02": ReviewEdit(feedback_override="reworded")}}, AT)
    assert set(job.review_edits) == {"d02"}
    job = apply_event(job, JobEvent.EDIT_REVIEW, {"edits": {}}, AT)
    assert job.review_edits == {}


def test_edit_review_rejects_unknown_dimension():
    job = job_in(JobState.AWAITING_REVIEW)
    with pytest.raises(ValueError, match="d42"):
        apply_event(job, JobEvent.EDIT_REVIEW,
                    {"edits": {"d42": ReviewEdit(score_override=1)}}, AT)


def test_review_edit_field_validation():
    with pytest.raises(ValueError):
        ReviewEdit()
    with pytest.raises(ValueError):
        ReviewEdit(score_override=3)
    assert ReviewEdit(score_override=0).feedback_override is None
    assert ReviewEdit(feedback_override="text").score_override is None
    both = ReviewEdit(score_override=2, feedback_override="text")
    assert ReviewEdit.from_dict(both.to_dict()) == both


# --- replay ---------------------------------------------------------------------


def test_replay_reconstructs_record_exactly():
    job = job_in(JobState.RECEIVED)
    job = apply_event(job, JobEvent.START_SCORING, None, AT)
    job = apply_event(job, JobEvent.SCORING_COMPLETE,
                      {"master": master_for(job.essay.essay_id)}, AT)
    job = apply_event(job, JobEvent.EDIT_REVIEW,
                      {"edits": {"d02": ReviewEdit(score_override=2, feedback_override="better")}}, AT)
    job = apply_event(job, JobEvent.APPROVE, {"note": "ok"}, AT)

    rebuilt = replay(job.job_id, job.essay, job.created_at, job.history)
    assert rebuilt.to_dict() == job.to_dict()
    canon = lambda j: json.dumps(j.to_dict(), sort_keys=True, separators=(",", ":"))
    assert canon(rebuilt) == canon(job)


def test_replay_of_failed_job():
    job = apply_event(job_in(JobState.SCORING), JobEvent.FAIL, {"cause": "empty essay"}, AT)
    rebuilt = replay(job.job_id, job.essay, job.created_at, job.history)
    assert rebuilt.state is JobState.FAILED
    assert rebuilt.failure_cause == "empty essay"


# --- persistent store -------------------------------------------------------------


def test_store_lifecycle_and_replay_from_disk(tmp_path, fixed_time):
    store = JobStore(tmp_path)
    essay = make_raw()
    job = store.create_job(essay)
    assert job.state is JobState.RECEIVED
    assert store.get_job(job.job_id).to_dict() == job.to_dict()

    store.transition(job.job_id, JobEvent.START_SCORING)
    store.transition(job.job_id, JobEvent.SCORING_COMPLETE,
                     {"master": master_for(essay.essay_id)})
    final = store.transition(job.job_id, JobEvent.APPROVE)
    assert final.state is JobState.APPROVED

    record = store.get_job(job.job_id)
    rebuilt = replay(record.job_id, record.essay, record.created_at, record.history)
    assert rebuilt.to_dict() == record.to_dict()


def test_store_round_trips_through_json(tmp_path, fixed_time):
    store = JobStore(tmp_path)
    job = store.create_job(make_raw(), job_id="jfixed")
    raw = (tmp_path / "jfixed" / "record.json").read_text(encoding="utf-8")
    assert GradingJob.from_dict(json.loads(raw)).to_dict() == job.to_dict()


def test_store_rejects_unknown_and_duplicate_jobs(tmp_path):
    store = JobStore(tmp_path)
    with pytest.raises(UnknownJob):
        store.get_job("jmissing")
    with pytest.raises(UnknownJob):
        store.transition("jmissing", JobEvent.START_SCORING)
    store.create_job(make_raw(), job_id="jdup")
    with pytest.raises(ValueError):
        store.create_job(make_raw(), job_id="jdup")


def test_store_generates_distinct_ids(tmp_path):
    store = JobStore(tmp_path)
    ids = {store.create_job(make_raw(essay_id=f"e{i:04d}")).job_id for i in range(20)}
    assert len(ids) == 20


def test_list_jobs_ordering_and_filter(tmp_path, fixed_time):
    store = JobStore(tmp_path)
    for job_id in ("ja", "jb", "jc"):
        store.create_job(make_raw(), job_id=job_id)
    assert [j.job_id for j in store.list_jobs()] == ["jc", "jb", "ja"]

    store.transition("jb", JobEvent.START_SCORING)
    assert [j.job_id for j in store.list_jobs(JobState.RECEIVED)] == ["jc", "ja"]
    assert [j.job_id for j in store.list_jobs(JobState.SCORING)] == ["jb"]
    assert store.list_jobs(JobState.FAILED) == []


def test_crash_between_temp_write_and_rename_preserves_record(tmp_path, monkeypatch):
    store = JobStore(tmp_path)
    job = store.create_job(make_raw(), job_id="jcrash")
    before = (tmp_path / "jcrash" / "record.json").read_bytes()

    real_replace = os.replace

    def crash(src, dst):
        raise OSError("power loss")

    monkeypatch.setattr(os, "replace", crash)
    with pytest.raises(IoFailure):
        store.transition("jcrash", JobEvent.START_SCORING)
    monkeypatch.setattr(os, "replace", real_replace)

    assert (tmp_path / "jcrash" / "record.json").read_bytes() == before
    recovered = store.get_job("jcrash")
    assert recovered.state is JobState.RECEIVED
    assert list((tmp_path / "jcrash").glob("*.tmp")) == []

    resumed = store.transition("jcrash", JobEvent.START_SCORING)
    assert resumed.state is JobState.SCORING


def test_concurrent_edits_serialize_on_the_lock(tmp_path):
    store = JobStore(tmp_path)
    essay = make_raw()
    job = store.create_job(essay)
    store.transition(job.job_id, JobEvent.START_SCORING)
    store.transition(job.job_id, JobEvent.SCORING_COMPLETE,
                     {"master": master_for(essay.essay_id)})

    def edit_many(worker: int):
        for i in range(10):
            store.transition(job.job_id, JobEvent.EDIT_REVIEW,
                             {"edits": {"d01": ReviewEdit(feedback_override=f"w{worker}-{i}")}})

    with ThreadPoolExecutor(max_workers=2) as pool:
        list(pool.map(edit_many, [1, 2]))

    record = store.get_job(job.job_id)
    assert record.state is JobState.AWAITING_REVIEW
    assert len(record.history) == 2 + 20
    assert set(record.review_edits) == {"d01"}
