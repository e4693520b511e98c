"""Corpus and label files: UTF-8, one JSON record per line.

A corpus line is {"essay_id", "customer_name", "submitted_at", "body"};
a labels line is {"essay_id", "scores": {dimension_id: 0|1|2}}.  Readers
raise ValueError with "path:line: reason" so callers can surface
line-numbered diagnostics verbatim.
"""

from __future__ import annotations

import json
from pathlib import Path
from typing import Iterable, Mapping

from .preprocess import RawEssay


def _lines(path: Path):
    for lineno, line in enumerate(path.read_text(encoding="utf-8").splitlines(), start=1):
        if line.strip():
            yield lineno, line


def _parse(path: Path, lineno: int, line: str) -> dict:
    try:
        record = json.loads(line)
    except json.JSONDecodeError as exc:
        raise ValueError(f"{path}:{lineno}: invalid JSON: {exc.msg}") from None
    if not isinstance(record, dict):
        raise ValueError(f"{path}:{lineno}: expected a JSON object")
    return record


def write_corpus(essays: Iterable[RawEssay], path: str | Path) -> None:
    with open(path, "w", encoding="utf-8") as fh:
        for essay in essays:
            fh.write(json.dumps(essay.to_dict(), sort_keys=True, ensure_ascii=False) + "\n")


def read_corpus(path: str | Path) -> list[RawEssay]:
    path = Path(path)
    essays = []
    seen: set[str] = set()
    for lineno, line in _lines(path):
        record = _parse(path, lineno, line)
        try:
            essay = RawEssay.from_dict(record)
        except (KeyError, ValueError, TypeError) as exc:
            raise ValueError(f"{path}:{lineno}: bad essay record: {exc}") from None
        if essay.essay_id in seen:
            raise ValueError(f"{path}:{lineno}: duplicate essay_id {essay.essay_id!r}")
        seen.add(essay.essay_id)
        essays.append(essay)
    if not essays:
        raise ValueError(f"{path}:1: corpus is empty")
    return essays


def write_labels(labels: Mapping[str, Mapping[str, int]], path: str | Path) -> None:
    with open(path, "w", encoding="utf-8") as fh:
        for essay_id in labels:
            record = {"essay_id": essay_id, "scores": dict(sorted(labels[essay_id].items()))}
            fh.write(json.dumps(record, sort_keys=True, ensure_ascii=False) + "\n")


def read_labels(path: str | Path) -> dict[str, dict[str, int]]:
    path = Path(path)
    labels: dict[str, dict[str, int]] = {}
    for lineno, line in _lines(path):
        record = _parse(path, lineno, line)
        essay_id = record.get("essay_id")
        scores = record.get("scores")
        if not essay_id or not isinstance(scores, dict):
            raise ValueError(f"{path}:{lineno}: label record needs essay_id and scores")
        if essay_id in labels:
            raise ValueError(f"{path}:{lineno}: duplicate essay_id {essay_id!r}")
        clean: dict[str, int] = {}
        for dim, score in scores.items():
            if score not in (0, 1, 2):
                raise ValueError(f"{path}:{lineno}: score for {dim!r} must be 0, 1 or 2")
            clean[dim] = int(score)
        labels[essay_id] = clean
    if not labels:
        raise ValueError(f"{path}:1: labels file is empty")
    return labels
