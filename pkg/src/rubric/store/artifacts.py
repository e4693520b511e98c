"""Versioned model artifacts: train once, save offline, load at serving time.

The ``.rbrk`` file layout, byte by byte:

    offset  size  content
    0       5     magic b"RBRK1"
    5       4     header length H, big-endian u32
    9       H     header: canonical JSON (sorted keys, no spaces), UTF-8
    9+H     8     payload length P, big-endian u64
    17+H    P     payload: canonical JSON, UTF-8
    17+H+P  8     CRC-64 of header+payload bytes, big-endian u64

The header carries {created_at, dimension_id, format_version, kind,
model_version}; the payload carries {eval_report, feature_config, params,
vocab_fingerprint, vocabulary}.  The checksum polynomial is the one in
``rubric.hashing``.  model_version is derived from the payload bytes, so the
same trained model always gets the same version, and a retrained model gets
a new one; stored artifacts are never rewritten.
"""

from __future__ import annotations

import json
import os
import struct
import tempfile
from dataclasses import dataclass
from datetime import datetime
from pathlib import Path

from .. import clock
from ..classifiers import EvalReport, MultinomialNaiveBayes, PegasosSvm
from ..errors import (
    ChecksumMismatch,
    IoFailure,
    UnresolvableModel,
    UnsupportedFormatVersion,
    VocabMismatch,
)
from ..features import FeatureConfig, Vocabulary
from ..hashing import crc64

MAGIC = b"RBRK1"
FORMAT_VERSION = 1
ARTIFACT_SUFFIX = ".rbrk"

_KINDS = {"NB": MultinomialNaiveBayes, "SVM": PegasosSvm}


def _kind_of(model) -> str:
    for kind, cls in _KINDS.items():
        if isinstance(model, cls):
            return kind
    raise TypeError(f"unsupported model type {type(model).__name__}")


def _canonical(obj) -> bytes:
    return json.dumps(obj, sort_keys=True, separators=(",", ":"), ensure_ascii=False).encode("utf-8")


@dataclass(frozen=True)
class LoadedModel:
    """Everything an expert needs from one artifact."""

    model: MultinomialNaiveBayes | PegasosSvm
    vocabulary: Vocabulary
    kind: str
    dimension_id: str
    model_version: str
    created_at: datetime
    eval_report: EvalReport | None


def _atomic_write(path: Path, data: bytes) -> None:
    path.parent.mkdir(parents=True, exist_ok=True)
    fd, tmp = tempfile.mkstemp(dir=path.parent, prefix=path.name + ".", suffix=".tmp")
    try:
        with os.fdopen(fd, "wb") as fh:
            fh.write(data)
            fh.flush()
            os.fsync(fh.fileno())
        os.replace(tmp, path)
    except OSError as exc:
        raise IoFailure(f"writing {path}: {exc}") from exc
    finally:
        if os.path.exists(tmp):
            os.unlink(tmp)


def _encode(model, vocabulary: Vocabulary, dimension_id: str,
            eval_report: EvalReport | None, created_at: datetime) -> tuple[bytes, str]:
    fp = getattr(model, "vocab_fingerprint_", None)
    if fp is not None and fp != vocabulary.fingerprint():
        raise VocabMismatch(
            f"model fingerprint {fp} does not match vocabulary fingerprint "
            f"{vocabulary.fingerprint()}"
        )
    payload = {
        "eval_report": eval_report.to_dict() if eval_report is not None else None,
        "feature_config": vocabulary.config.to_dict(),
        "params": model.params_dict(),
        "vocab_fingerprint": vocabulary.fingerprint(),
        "vocabulary": vocabulary.to_dict(),
    }
    payload_bytes = _canonical(payload)
    model_version = f"v{crc64(payload_bytes):016x}"
    header = {
        "created_at": clock.isoformat(created_at),
        "dimension_id": dimension_id,
        "format_version": FORMAT_VERSION,
        "kind": _kind_of(model),
        "model_version": model_version,
    }
    header_bytes = _canonical(header)
    blob = b"".join(
        [
            MAGIC,
            struct.pack(">I", len(header_bytes)),
            header_bytes,
            struct.pack(">Q", len(payload_bytes)),
            payload_bytes,
            struct.pack(">Q", crc64(header_bytes + payload_bytes)),
        ]
    )
    return blob, model_version


def save_model(model, vocabulary: Vocabulary, dimension_id: str, path: str | Path,
               eval_report: EvalReport | None = None,
               created_at: datetime | None = None) -> str:
    """Write one artifact atomically (temp file + rename); returns model_version.

    An existing file at ``path`` is left untouched: artifacts are immutable,
    and a content-identical re-save simply keeps the original bytes.
    """
    path = Path(path)
    blob, model_version = _encode(
        model, vocabulary, dimension_id, eval_report,
        created_at if created_at is not None else clock.now(),
    )
    if path.exists():
        return load_model(path).model_version
    _atomic_write(path, blob)
    return model_version


def load_model(path: str | Path) -> LoadedModel:
    """Read and verify one artifact; predictions of the loaded model are
    bitwise identical to the saved one's."""
    path = Path(path)
    try:
        raw = path.read_bytes()
    except OSError as exc:
        raise IoFailure(f"reading {path}: {exc}") from exc

    if len(raw) < len(MAGIC) + 4 or raw[: len(MAGIC)] != MAGIC:
        raise UnsupportedFormatVersion(f"{path}: not a model artifact (bad magic)")
    pos = len(MAGIC)
    (header_len,) = struct.unpack_from(">I", raw, pos)
    pos += 4
    if pos + header_len + 8 > len(raw):
        raise ChecksumMismatch(f"{path}: truncated artifact")
    header_bytes = raw[pos : pos + header_len]
    pos += header_len
    (payload_len,) = struct.unpack_from(">Q", raw, pos)
    pos += 8
    if pos + payload_len + 8 > len(raw):
        raise ChecksumMismatch(f"{path}: truncated artifact")
    payload_bytes = raw[pos : pos + payload_len]
    pos += payload_len
    (stored_crc,) = struct.unpack_from(">Q", raw, pos)
    actual_crc = crc64(header_bytes + payload_bytes)
    if stored_crc != actual_crc:
        raise ChecksumMismatch(
            f"{path}: checksum 0x{actual_crc:016x} does not match stored 0x{stored_crc:016x}"
        )

    header = json.loads(header_bytes.decode("utf-8"))
    if header.get("format_version") != FORMAT_VERSION:
        raise UnsupportedFormatVersion(
            f"{path}: format_version {header.get('format_version')!r}, expected {FORMAT_VERSION}"
        )
    kind = header["kind"]
    if kind not in _KINDS:
        raise UnsupportedFormatVersion(f"{path}: unknown classifier kind {kind!r}")

    payload = json.loads(payload_bytes.decode("utf-8"))
    vocabulary = Vocabulary.from_dict(payload["vocabulary"])
    if payload["vocab_fingerprint"] != vocabulary.fingerprint():
        raise VocabMismatch(
            f"{path}: payload fingerprint {payload['vocab_fingerprint']} does not match "
            f"embedded vocabulary {vocabulary.fingerprint()}"
        )
    model = _KINDS[kind].from_params_dict(payload["params"])
    report = payload["eval_report"]
    return LoadedModel(
        model=model,
        vocabulary=vocabulary,
        kind=kind,
        dimension_id=header["dimension_id"],
        model_version=header["model_version"],
        created_at=clock.parse_instant(header["created_at"]),
        eval_report=EvalReport.from_dict(report) if report is not None else None,
    )


class ModelStore:
    """Directory of artifacts laid out as <root>/<dimension_id>/<version>.rbrk.

    A model_ref is "<dimension_id>/<model_version>"; refs resolve to exactly
    one immutable file, so an expert's model can be swapped by changing its
    ref, never by editing bytes in place.
    """

    def __init__(self, root: str | Path):
        self.root = Path(root)

    def path_of(self, dimension_id: str, model_version: str) -> Path:
        return self.root / dimension_id / f"{model_version}{ARTIFACT_SUFFIX}"

    def save(self, model, vocabulary: Vocabulary, dimension_id: str,
             eval_report: EvalReport | None = None,
             created_at: datetime | None = None) -> str:
        blob, model_version = _encode(
            model, vocabulary, dimension_id, eval_report,
            created_at if created_at is not None else clock.now(),
        )
        path = self.path_of(dimension_id, model_version)
        if not path.exists():
            _atomic_write(path, blob)
        return model_version

    def load(self, dimension_id: str, model_version: str) -> LoadedModel:
        path = self.path_of(dimension_id, model_version)
        if not path.exists():
            raise UnresolvableModel(f"no artifact for {dimension_id}/{model_version} under {self.root}")
        return load_model(path)

    def resolve(self, model_ref: str):
        """Registry resolver hook: ref "<dimension_id>/<model_version>" to
        (model, vocabulary, model_version)."""
        dimension_id, sep, model_version = model_ref.partition("/")
        if not sep or not dimension_id or not model_version:
            raise UnresolvableModel(f"malformed model_ref {model_ref!r}, want '<dimension>/<version>'")
        loaded = self.load(dimension_id, model_version)
        return loaded.model, loaded.vocabulary, loaded.model_version

    def versions(self, dimension_id: str) -> list[str]:
        d = self.root / dimension_id
        if not d.is_dir():
            return []
        return sorted(p.stem for p in d.glob(f"*{ARTIFACT_SUFFIX}"))

    def dimensions(self) -> list[str]:
        if not self.root.is_dir():
            return []
        return sorted(p.name for p in self.root.iterdir() if p.is_dir())
