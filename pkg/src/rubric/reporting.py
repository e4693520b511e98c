"""Customer report assembly and rendering.

A report is built from an approved job: assessor overrides are merged over
the machine results, the final score is recomputed with the same weighted
mean used at scoring time, and rounding to two decimals (half-up) happens
here and only here.  Rendering is a pure function of the Report: STRUCTURED
yields a canonical JSON document (sorted keys, compact separators, byte
comparable), PRINTABLE yields one self-contained page with embedded styling
and no external references, ready to pipe into any print engine for PDF
conversion.
"""

from __future__ import annotations

import html
import json
import subprocess
from dataclasses import dataclass, replace
from datetime import datetime
from enum import Enum
from fractions import Fraction

from . import clock
from .errors import NotApproved, RenderFailure
from .experts import ExpertRegistry, aggregate
from .store.jobs import GradingJob, JobState


class ReportFormat(str, Enum):
    STRUCTURED = "STRUCTURED"
    PRINTABLE = "PRINTABLE"


@dataclass(frozen=True)
class ReportRow:
    dimension_id: str
    display_name: str
    score: int
    feedback_text: str

    def to_dict(self) -> dict:
        return {
            "dimension_id": self.dimension_id,
            "display_name": self.display_name,
            "score": self.score,
            "feedback_text": self.feedback_text,
        }


@dataclass(frozen=True)
class Report:
    customer_name: str
    essay_id: str
    generated_at: datetime
    rows: tuple[ReportRow, ...]
    final_score: Fraction
    model_manifest: tuple[tuple[str, str], ...]
    approver_note: str | None = None

    @property
    def final_score_display(self) -> str:
        return round_half_up_2dp(self.final_score)

    def to_dict(self) -> dict:
        return {
            "customer_name": self.customer_name,
            "essay_id": self.essay_id,
            "generated_at": clock.isoformat(self.generated_at),
            "rows": [row.to_dict() for row in self.rows],
            "final_score": str(self.final_score),
            "final_score_display": self.final_score_display,
            "model_manifest": [list(pair) for pair in self.model_manifest],
            "approver_note": self.approver_note,
        }


def round_half_up_2dp(value: Fraction) -> str:
    """Exact half-up rounding of a non-negative rational to 2 decimals."""
    if value < 0:
        raise ValueError("scores are never negative")
    scaled = value * 100
    q, r = divmod(scaled.numerator, scaled.denominator)
    if 2 * r >= scaled.denominator:
        q += 1
    return f"{q // 100}.{q % 100:02d}"


def assemble_report(job: GradingJob, registry: ExpertRegistry) -> Report:
    """Merge review overrides over the machine assessment and recompute the
    final score; requires an approved (or already reported) job."""
    if job.state not in (JobState.APPROVED, JobState.REPORTED):
        raise NotApproved(f"job {job.job_id!r} is {job.state.value}, not APPROVED")
    master = job.master
    assert master is not None  # guaranteed by the state machine

    merged = {}
    rows = []
    for dim in registry.dimension_ids:
        result = master.results.get(dim)
        if result is None:
            # aggregate() raises IncompleteResults with the full missing list
            continue
        edit = job.review_edits.get(dim)
        if edit is not None:
            if edit.score_override is not None:
                result = replace(result, score=edit.score_override)
            if edit.feedback_override is not None:
                result = replace(result, feedback_text=edit.feedback_override)
        merged[dim] = result
        rows.append(
            ReportRow(
                dimension_id=dim,
                display_name=registry[dim].descriptor.display_name,
                score=result.score,
                feedback_text=result.feedback_text,
            )
        )
    final = aggregate(merged, registry)
    return Report(
        customer_name=job.essay.customer_name,
        essay_id=job.essay.essay_id,
        generated_at=clock.now(),
        rows=tuple(rows),
        final_score=final,
        model_manifest=master.model_manifest,
        approver_note=job.approver_note,
    )


_PAGE_STYLE = """
body { font-family: Georgia, 'Times New Roman', serif; color: #1a1a1a;
       max-width: 46em; margin: 2em auto; padding: 0 1em; }
h1 { font-size: 1.6em; border-bottom: 2px solid #1a1a1a; padding-bottom: 0.3em; }
.meta { color: #444; margin-bottom: 1.5em; }
table { border-collapse: collapse; width: 100%; }
th, td { border: 1px solid #999; padding: 0.5em 0.7em; text-align: left;
         vertical-align: top; }
th { background: #efefef; }
td.score { text-align: center; width: 4em; }
.final { font-size: 1.3em; margin-top: 1em; font-weight: bold; }
.note { margin-top: 1em; font-style: italic; }
.manifest { margin-top: 2em; color: #777; font-size: 0.75em; }
@media print { body { margin: 0 auto; } }
""".strip()


def _render_printable(report: Report) -> bytes:
    esc = html.escape
    rows_html = "\n".join(
        f"<tr><td>{esc(row.display_name)}</td>"
        f"<td class=\"score\">{row.score}</td>"
        f"<td>{esc(row.feedback_text)}</td></tr>"
        for row in report.rows
    )
    note_html = (
        f"<p class=\"note\">Assessor note: {esc(report.approver_note)}</p>"
        if report.approver_note
        else ""
    )
    manifest = ", ".join(f"{esc(d)}={esc(v)}" for d, v in report.model_manifest)
    page = f"""<!DOCTYPE html>
<html lang="en">
<head>
<meta charset="utf-8">
<title>Essay assessment report: {esc(report.essay_id)}</title>
<style>
{_PAGE_STYLE}
</style>
</head>
<body>
<h1>Essay Assessment Report</h1>
<p class="meta">Prepared for {esc(report.customer_name)}<br>
Essay {esc(report.essay_id)} &middot; Generated {esc(clock.isoformat(report.generated_at))}</p>
<table>
<thead><tr><th>Dimension</th><th>Score</th><th>Feedback</th></tr></thead>
<tbody>
{rows_html}
</tbody>
</table>
<p class="final">Final score: {esc(report.final_score_display)} / 2</p>
{note_html}
<p class="manifest">Model manifest: {manifest}</p>
</body>
</html>
"""
    return page.encode("utf-8")


def render_report(report: Report, fmt: ReportFormat) -> bytes:
    fmt = ReportFormat(fmt)
    try:
        if fmt is ReportFormat.STRUCTURED:
            return json.dumps(
                report.to_dict(), sort_keys=True, separators=(",", ":"), ensure_ascii=False
            ).encode("utf-8")
        return _render_printable(report)
    except RenderFailure:
        raise
    except Exception as exc:
        raise RenderFailure(f"rendering {fmt.value} report for {report.essay_id!r}: {exc}") from exc


def print_to_pdf(printable_page: bytes, print_command: str) -> bytes:
    """Convert a PRINTABLE page to PDF via the configured external command,
    which reads the page on stdin and writes PDF bytes to stdout."""
    try:
        proc = subprocess.run(
            print_command, shell=True, input=printable_page,
            capture_output=True, check=False,
        )
    except OSError as exc:
        raise RenderFailure(f"print command failed to start: {exc}") from exc
    if proc.returncode != 0:
        detail = proc.stderr.decode("utf-8", "replace").strip()
        raise RenderFailure(f"print command exited {proc.returncode}: {detail}")
    return proc.stdout
