"""Experiment configuration."""

from .models import ExperimentConfig
from .loader import load_config, dump_config

__all__ = ["ExperimentConfig", "load_config", "dump_config"]
