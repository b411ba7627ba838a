"""Runtime configuration: file, environment, and flag layering.

Precedence, lowest to highest: built-in defaults, config file (TOML or
JSON), ``TRUSTLENS_*`` environment variables, explicit overrides (CLI
flags). Keys are flat and match the field names below.
"""

from __future__ import annotations

import dataclasses
import json
import os
from dataclasses import dataclass, field
from pathlib import Path
from typing import Any, Dict, Mapping, Optional

try:
    import tomllib
except ModuleNotFoundError:  # pragma: no cover - 3.10 fallback
    import tomli as tomllib

from trustlens.errors import TrustlensError
from trustlens.model import LearnerKind, ValidationError

ENV_PREFIX = "TRUSTLENS_"

#: Short names accepted anywhere a learner is named.
LEARNER_ALIASES = {
    "rf": LearnerKind.RANDOM_FOREST,
    "random_forest": LearnerKind.RANDOM_FOREST,
    "svm": LearnerKind.SVM,
    "mlp": LearnerKind.MLP,
}


def resolve_learner(name: str) -> LearnerKind:
    try:
        return LEARNER_ALIASES[name.strip().lower()]
    except KeyError:
        raise ValidationError(
            f"unknown learner {name!r}; expected one of "
            f"{sorted(set(LEARNER_ALIASES))}")


@dataclass(frozen=True)
class Config:
    dataset_dir: Optional[str] = None
    learner: str = "random_forest"
    strategy: str = "margin"
    batch_size: int = 100
    base_seed: int = 0
    feature_mask: str = "default"
    learner_params: Dict[str, Any] = field(default_factory=dict)

    percentile: float = 99.0
    denominator: str = "statuses"
    dead_zone: float = 0.05

    max_rounds: int = 50
    min_gain: float = 0.005
    folds: int = 10

    host: str = "127.0.0.1"
    port: int = 8000
    annotators_required: int = 2
    seed_labels: Optional[str] = None
    state_dir: Optional[str] = None
    static_dir: Optional[str] = None

    def learner_kind(self) -> LearnerKind:
        return resolve_learner(self.learner)

    def to_dict(self) -> Dict[str, Any]:
        return dataclasses.asdict(self)


_FIELDS = {f.name: f for f in dataclasses.fields(Config)}


def _coerce(name: str, value: Any) -> Any:
    """Coerce a raw file/env value to the field's declared type."""
    if name == "learner_params":
        if isinstance(value, str):
            value = json.loads(value)
        if not isinstance(value, dict):
            raise ValidationError("learner_params must be a table/object")
        return dict(value)
    target = _FIELDS[name].type
    if target.startswith("Optional"):
        if value is None:
            return None
        return str(value)
    if target == "int":
        if isinstance(value, bool):
            raise ValidationError(f"{name} must be an integer")
        return int(value)
    if target == "float":
        return float(value)
    return str(value)


def _validate(cfg: Config) -> Config:
    resolve_learner(cfg.learner)
    if cfg.strategy not in ("uncertainty", "margin", "entropy", "random"):
        raise ValidationError(f"unknown strategy {cfg.strategy!r}")
    if cfg.batch_size < 1:
        raise ValidationError("batch_size must be positive")
    if cfg.denominator not in ("statuses", "collected"):
        raise ValidationError(
            "denominator must be 'statuses' or 'collected'")
    if not 50.0 < cfg.percentile <= 100.0:
        raise ValidationError("percentile must lie in (50, 100]")
    if not 0.0 <= cfg.dead_zone < 1.0:
        raise ValidationError("dead_zone must lie in [0, 1)")
    if cfg.max_rounds < 1:
        raise ValidationError("max_rounds must be positive")
    if cfg.folds < 2:
        raise ValidationError("folds must be at least 2")
    if cfg.annotators_required < 1:
        raise ValidationError("annotators_required must be at least 1")
    if cfg.feature_mask not in ("default", "all"):
        raise ValidationError("feature_mask must be 'default' or 'all'")
    return cfg


def _read_file(path: Path) -> Dict[str, Any]:
    if not path.exists():
        raise TrustlensError(f"config file not found: {path}")
    if path.suffix == ".json":
        with open(path, "r", encoding="utf-8") as fh:
            data = json.load(fh)
    else:
        with open(path, "rb") as fh:
            data = tomllib.load(fh)
    if not isinstance(data, dict):
        raise ValidationError("config root must be a table/object")
    return data


def load_config(
    path: Optional[str] = None,
    env: Optional[Mapping[str, str]] = None,
    overrides: Optional[Mapping[str, Any]] = None,
) -> Config:
    """Layer defaults, file, environment, and overrides into a Config."""
    values: Dict[str, Any] = {}

    if path is not None:
        for key, raw in _read_file(Path(path)).items():
            if key not in _FIELDS:
                raise ValidationError(f"unknown config key {key!r}")
            values[key] = _coerce(key, raw)

    env = os.environ if env is None else env
    for key in _FIELDS:
        env_key = ENV_PREFIX + key.upper()
        if env_key in env:
            values[key] = _coerce(key, env[env_key])

    if overrides:
        for key, raw in overrides.items():
            if raw is None:
                continue
            if key not in _FIELDS:
                raise ValidationError(f"unknown config key {key!r}")
            values[key] = _coerce(key, raw)

    return _validate(Config(**values))
