"""Python access to the gosprl exploration library."""

import json

from ._core import (
    ConfigError,
    DivergenceError,
    ParameterError,
    ValidationError,
    env_info,
    estimate_diameter,
    git_blob_hash,
    kernel,
    run_treasure,
)
from ._core import run_config as _run_config

__all__ = [
    "ConfigError",
    "DivergenceError",
    "ParameterError",
    "ValidationError",
    "env_info",
    "estimate_diameter",
    "git_blob_hash",
    "kernel",
    "run_config",
    "run_treasure",
]


def run_config(config, workers=1, seed_offset=0, base_dir="."):
    """Run an experiment given as a dict or JSON text; returns (runs_csv, summary)."""
    text = config if isinstance(config, str) else json.dumps(config)
    csv, summary = _run_config(text, workers, seed_offset, base_dir)
    return csv, json.loads(summary)
