"""
YAML configuration loading with command-line overrides
"""

import logging
from pathlib import Path
from typing import Any, Dict, Mapping, Optional, Union

import yaml
from pydantic import ValidationError

from ..exceptions import ConfigError
from .models import ExperimentConfig

logger = logging.getLogger(__name__)

# CLI flag -> (section, key)
OVERRIDE_KEYS = {
    "seed": ("chain", "seed"),
    "alpha": ("chain", "alpha"),
    "lattice": ("lattice", "kind"),
    "L": ("lattice", "L"),
    "out": ("output", "directory"),
    "workers": ("output", "workers"),
    "samples": ("chain", "samples"),
}


def _merge(base: Dict[str, Any], overrides: Mapping[str, Any]) -> Dict[str, Any]:
    merged = {k: dict(v) if isinstance(v, dict) else v for k, v in base.items()}
    for flag, value in overrides.items():
        if value is None:
            continue
        if flag not in OVERRIDE_KEYS:
            raise ConfigError(f"unknown override {flag}")
        section, key = OVERRIDE_KEYS[flag]
        merged.setdefault(section, {})[key] = value
    return merged


def load_config(path: Optional[Union[str, Path]] = None,
                overrides: Optional[Mapping[str, Any]] = None) -> ExperimentConfig:
    """Read ``path`` (if any), apply non-None overrides and validate"""
    raw: Dict[str, Any] = {}
    if path is not None:
        try:
            with open(path, encoding="utf-8") as fh:
                raw = yaml.safe_load(fh) or {}
        except OSError as e:
            raise ConfigError(f"cannot read config {path}: {e}") from e
        except yaml.YAMLError as e:
            raise ConfigError(f"invalid YAML in {path}: {e}") from e
        if not isinstance(raw, dict):
            raise ConfigError(f"{path}: top level must be a mapping")
    merged = _merge(raw, overrides or {})
    try:
        config = ExperimentConfig.model_validate(merged)
    except ValidationError as e:
        raise ConfigError(f"invalid configuration: {e}") from e
    logger.debug(f"configuration {config.config_hash()[:12]} loaded from {path or 'defaults'}")
    return config


def dump_config(config: ExperimentConfig, path: Union[str, Path]) -> Path:
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    with open(path, "w", encoding="utf-8") as fh:
        yaml.safe_dump(config.model_dump(mode="json"), fh, sort_keys=False)
    return path
