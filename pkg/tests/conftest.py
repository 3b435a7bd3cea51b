"""
Pytest Fixtures
---------------
Shared resources for testing.
- lines_chart / lines_family / lines_atlas: three coplanar lines through the origin of ℝ³
  plus the origin itself.
- corner_chart: the quarter plane [0,∞)² with one interior coordinate.
- rng: seeded numpy generator.
"""

from __future__ import annotations

from pathlib import Path

import numpy as np
import pytest

from corner_calculus.arrangement import AffinePSub, sub_from_equations
from corner_calculus.atlas import Atlas, orthant_atlas
from corner_calculus.orthant import OrthantChart, sym

ROOT = Path(__file__).resolve().parent.parent


@pytest.fixture
def lines_chart() -> OrthantChart:
    return OrthantChart((), ("x1", "x2", "x3"))


@pytest.fixture
def lines_family(lines_chart: OrthantChart) -> dict[str, AffinePSub]:
    """F1 = {x1 = x3 = 0}, F2 = {0}, F3 = {x2 = x3 = 0}, F4 = {x1 = x2, x3 = 0}."""
    x1, x2, x3 = (sym(n) for n in ("x1", "x2", "x3"))
    eqs = {
        "F1": [x1, x3],
        "F2": [x1, x2, x3],
        "F3": [x2, x3],
        "F4": [x1 - x2, x3],
    }
    out = {}
    for name, e in eqs.items():
        sub = sub_from_equations(lines_chart, e, name=name)
        assert sub is not None
        out[name] = sub
    return out


@pytest.fixture
def lines_atlas(lines_chart: OrthantChart, lines_family: dict[str, AffinePSub]) -> Atlas:
    return orthant_atlas(lines_chart, lines_family, name="coplanar_lines")


@pytest.fixture
def corner_chart() -> OrthantChart:
    return OrthantChart(("x", "y"), ("w",))


@pytest.fixture
def rng() -> np.random.Generator:
    return np.random.default_rng(1234)


@pytest.fixture
def families_dir() -> Path:
    return ROOT / "configs" / "families"


@pytest.fixture
def base_config() -> str:
    return str(ROOT / "configs" / "base.yaml")
