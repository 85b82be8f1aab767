"""
Numeric settings for the certifier

All tolerances, sample sizes and horizons live in one validated record.
Defaults come from config/qqo_defaults.json when present, then from
environment variables (optionally loaded from a .env file).
"""
from __future__ import annotations
import os
import json
import logging
from functools import lru_cache
from pathlib import Path
from typing import Any, Dict, Optional

from dotenv import load_dotenv
from pydantic import BaseModel, Field, field_validator

# Configure logging
logger = logging.getLogger(__name__)

DEFAULT_CONFIG_FILE = Path(__file__).resolve().parent.parent / "config" / "qqo_defaults.json"

# Environment variable -> settings field
ENV_OVERRIDES = {
    "QQO_SEED": "seed",
    "QQO_SAMPLES": "ks_pairs",
    "QQO_WORKERS": "workers",
    "QQO_SPHERE_POINTS": "sphere_points",
    "QQO_ORACLE_SAMPLES": "oracle_samples",
}


class Tolerances(BaseModel):
    """Tolerances used by verdicts; every verdict also reports its margin"""
    hermitian: float = Field(1e-12, gt=0)
    positivity: float = Field(1e-12, gt=0)
    state_norm: float = Field(1e-12, gt=0)
    roundtrip: float = Field(1e-13, gt=0)
    dstar1: float = Field(1e-9, gt=0)
    dstar3: float = Field(1e-12, gt=0)
    triple_norm: float = Field(1e-6, gt=0)
    ks_residual: float = Field(1e-12, gt=0)
    witness: float = Field(1e-8, gt=0)
    bb: float = Field(1e-12, gt=0)
    equality: float = Field(1e-12, gt=0)
    ball_escape: float = Field(1e-9, gt=0)
    tilde_escape: float = Field(1e6, gt=0)
    tilde_zero: float = Field(1e-12, gt=0)
    dedupe: float = Field(1e-6, gt=0)


class Settings(BaseModel):
    """Run defaults for sampling, iteration and the eigensolver"""
    seed: int = Field(0, ge=0)
    sphere_points: int = Field(2562, ge=1)
    ks_pairs: int = Field(4096, ge=1)
    oracle_samples: int = Field(2048, ge=1)
    dstar1_random_pairs: int = Field(4096, ge=1)
    dstar1_pair_grid: int = Field(162, ge=1)
    triple_norm_refine: int = Field(50, ge=0)
    triple_norm_seeds: int = Field(8, ge=1)
    steps: int = Field(200, ge=1)
    tol: float = Field(1e-9, gt=0)
    fixed_point_residual: float = Field(1e-10, gt=0)
    tilde_horizon: int = Field(64, ge=1)
    bb33_max_n: int = Field(64, ge=1)
    fixed_point_steps: int = Field(500, ge=1)
    fixed_point_grid: int = Field(5, ge=1)
    damping: float = Field(0.5, gt=0, le=1)
    refine_steps: int = Field(50, ge=0)
    refine_decay: float = Field(0.5, gt=0, lt=1)
    jacobi_tol: float = Field(1e-13, gt=0)
    jacobi_max_sweeps: int = Field(100, ge=1)
    workers: int = Field(1, ge=1)
    tolerances: Tolerances = Field(default_factory=Tolerances)

    @field_validator("seed")
    @classmethod
    def validate_seed(cls, v: int) -> int:
        if v >= 2 ** 64:
            raise ValueError(f"Seed must fit in 64 bits: {v}")
        return v


def _read_config_file(config_file: Optional[Path]) -> Dict[str, Any]:
    """
    Read a JSON settings file if it exists

    Args:
        config_file: Path to the JSON file, or None for the packaged default

    Returns:
        Parsed dictionary (empty when the file is absent)
    """
    path = Path(config_file) if config_file is not None else DEFAULT_CONFIG_FILE
    if not path.exists():
        if config_file is not None:
            raise FileNotFoundError(f"Configuration file not found: {path}")
        return {}

    with open(path, "r", encoding="utf-8") as f:
        return json.load(f)


def load_settings(config_file: Optional[Path] = None, **overrides: Any) -> Settings:
    """
    Build validated settings from file, environment and keyword overrides

    Args:
        config_file: Optional JSON file; defaults to config/qqo_defaults.json
        **overrides: Field values that win over file and environment

    Returns:
        Settings instance

    Raises:
        FileNotFoundError: If an explicit config_file does not exist
        pydantic.ValidationError: If a value is out of range
    """
    load_dotenv()
    values = _read_config_file(config_file)

    for env_name, field_name in ENV_OVERRIDES.items():
        raw = os.getenv(env_name)
        if raw is not None and raw.strip():
            values[field_name] = int(raw)

    values.update({k: v for k, v in overrides.items() if v is not None})
    settings = Settings(**values)
    logger.debug("Settings loaded: seed=%s workers=%s", settings.seed, settings.workers)
    return settings


@lru_cache(maxsize=1)
def get_settings() -> Settings:
    """Cached default settings (file and environment applied once)"""
    return load_settings()
