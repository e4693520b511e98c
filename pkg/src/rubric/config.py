"""Service configuration and the registry file.

The config file is JSON; relative paths resolve against the file's own
directory.  Environment variables RUBRIC_PORT, RUBRIC_STORE and
RUBRIC_MODELS override the corresponding file values.

The registry file lists expert descriptors: {"experts": [{dimension_id,
display_name, weight, model_ref, template_set_ref}, ...]}.  model_ref is
"<dimension_id>/<model_version>" under the model directory;
template_set_ref is a template-file path, relative to the registry file.
"""

from __future__ import annotations

import json
import os
from dataclasses import dataclass
from pathlib import Path
from typing import Sequence

from .experts import ExpertDescriptor, ExpertRegistry, register_experts
from .feedback import load_template_set
from .store.artifacts import ModelStore

ENV_PORT = "RUBRIC_PORT"
ENV_STORE = "RUBRIC_STORE"
ENV_MODELS = "RUBRIC_MODELS"


@dataclass(frozen=True)
class ServiceConfig:
    models_dir: Path
    store_dir: Path
    registry_file: Path
    port: int = 8000
    sync_timeout_budget: float = 30.0
    worker_count: int = 1
    scoring_delay_seconds: float = 0.0  # test knob: stretches the scoring phase
    print_command: str | None = None

    def __post_init__(self):
        object.__setattr__(self, "models_dir", Path(self.models_dir))
        object.__setattr__(self, "store_dir", Path(self.store_dir))
        object.__setattr__(self, "registry_file", Path(self.registry_file))
        if not 1 <= self.port <= 65535:
            raise ValueError(f"port must be in [1, 65535], got {self.port}")
        if self.worker_count < 1:
            raise ValueError("worker_count must be >= 1")
        if self.sync_timeout_budget <= 0:
            raise ValueError("sync_timeout_budget must be positive")
        if self.scoring_delay_seconds < 0:
            raise ValueError("scoring_delay_seconds must be >= 0")


def load_service_config(path: str | Path) -> ServiceConfig:
    path = Path(path)
    with open(path, encoding="utf-8") as fh:
        raw = json.load(fh)
    base = path.parent

    def respath(value: str) -> Path:
        p = Path(value)
        return p if p.is_absolute() else base / p

    kwargs = {
        "models_dir": respath(raw["models_dir"]),
        "store_dir": respath(raw["store_dir"]),
        "registry_file": respath(raw["registry_file"]),
    }
    for key in ("port", "sync_timeout_budget", "worker_count", "scoring_delay_seconds", "print_command"):
        if key in raw:
            kwargs[key] = raw[key]

    if os.environ.get(ENV_PORT):
        kwargs["port"] = int(os.environ[ENV_PORT])
    if os.environ.get(ENV_STORE):
        kwargs["store_dir"] = Path(os.environ[ENV_STORE])
    if os.environ.get(ENV_MODELS):
        kwargs["models_dir"] = Path(os.environ[ENV_MODELS])
    return ServiceConfig(**kwargs)


def write_registry_file(descriptors: Sequence[ExpertDescriptor], path: str | Path) -> None:
    data = {"experts": [d.to_dict() for d in descriptors]}
    Path(path).write_text(
        json.dumps(data, sort_keys=True, indent=2, ensure_ascii=False) + "\n",
        encoding="utf-8",
    )


def read_registry_descriptors(path: str | Path) -> list[ExpertDescriptor]:
    with open(path, encoding="utf-8") as fh:
        data = json.load(fh)
    return [ExpertDescriptor.from_dict(d) for d in data["experts"]]


def load_registry(registry_file: str | Path, models_dir: str | Path) -> ExpertRegistry:
    """Read the registry file and resolve every expert's model and templates."""
    registry_file = Path(registry_file)
    descriptors = read_registry_descriptors(registry_file)
    store = ModelStore(models_dir)
    base = registry_file.parent

    def resolve_templates(ref: str):
        p = Path(ref)
        return load_template_set(p if p.is_absolute() else base / p)

    return register_experts(descriptors, store.resolve, resolve_templates)
