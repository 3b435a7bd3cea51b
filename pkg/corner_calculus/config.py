"""
Configuration Schemas
---------------------
Dataclasses for the YAML configuration: size caps for model construction and order
enumeration, runtime knobs, and artifact formatting.
"""

from __future__ import annotations

import os
from dataclasses import dataclass, field
from pathlib import Path
from typing import Any

import yaml

from corner_calculus.validator import validate_keys

HARD_MAX_LEVEL = 5
THREADS_ENV = "CORNER_CALCULUS_THREADS"


@dataclass
class LimitsCfg:
    """Caps that keep exhaustive checks tractable."""

    max_level: int = 4
    max_ambient_dim: int = 10
    max_poly_degree: int = 4
    order_cap: int = 3628800

    def __post_init__(self) -> None:
        if not 1 <= self.max_level <= HARD_MAX_LEVEL:
            raise ValueError(
                f"Limit Violation: max_level ({self.max_level}) must lie in [1, {HARD_MAX_LEVEL}]."
            )
        if self.max_ambient_dim < 1 or self.max_poly_degree < 0 or self.order_cap < 1:
            raise ValueError(
                "Limit Violation: max_ambient_dim and order_cap must be positive, "
                "max_poly_degree non-negative."
            )


@dataclass
class RuntimeCfg:
    threads: int = 1
    log_level: str = "WARNING"

    def __post_init__(self) -> None:
        valid = {"DEBUG", "INFO", "WARNING", "ERROR"}
        if self.log_level.upper() not in valid:
            raise ValueError(f"Invalid log_level: '{self.log_level}'. Must be one of {sorted(valid)}")
        if self.threads < 1:
            raise ValueError(f"threads must be >= 1, got {self.threads}")


@dataclass
class OutputCfg:
    indent: int = 2


@dataclass
class Config:
    """Root configuration object."""

    limits: LimitsCfg = field(default_factory=LimitsCfg)
    runtime: RuntimeCfg = field(default_factory=RuntimeCfg)
    output: OutputCfg = field(default_factory=OutputCfg)

    def __post_init__(self) -> None:
        self.limits.__post_init__()
        self.runtime.__post_init__()
        if self.output.indent < 0:
            raise ValueError(f"output.indent must be >= 0, got {self.output.indent}")

    @property
    def threads(self) -> int:
        """Thread count, with the environment variable taking precedence."""
        raw = os.environ.get(THREADS_ENV)
        if raw:
            try:
                return max(1, int(raw))
            except ValueError:
                raise ValueError(f"{THREADS_ENV} must be an integer, got {raw!r}") from None
        return self.runtime.threads


def _merge_dc(obj: Any, patch: dict[str, Any], *, path: str = "") -> Any:
    """Recursively merges a dictionary into a dataclass."""
    if not isinstance(patch, dict):
        return obj
    for k, v in patch.items():
        if not hasattr(obj, k):
            continue
        cur = getattr(obj, k)
        if hasattr(cur, "__dataclass_fields__") and isinstance(v, dict):
            _merge_dc(cur, v, path=path + k + ".")
        else:
            setattr(obj, k, v)
    return obj


def load_config(path: str | Path | None = None) -> Config:
    """
    Load configuration from YAML with strict key validation; None gives the defaults.
    """
    cfg = Config()
    if path is None:
        return cfg
    p = Path(path)
    if not p.exists():
        raise FileNotFoundError(f"Config file not found: {path}")

    with open(p, "r", encoding="utf-8") as f:
        data = yaml.safe_load(f) or {}

    validate_keys(data, Config)
    _merge_dc(cfg, data)
    cfg.__post_init__()
    return cfg
