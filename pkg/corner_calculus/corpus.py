"""
Random Affine Configurations
----------------------------
Seeded generators for small families of interior affine submanifolds of ℝⁿ that satisfy
the hypotheses of the two-centre commutation, disjoint-lift and transversal-lift results.

Each configuration is built as coordinate subspaces {w_i = 0, i ∈ S} in hidden linear
coordinates w = B(x − p), with B a random invertible integer matrix and p a random
integer point, so the members always meet p-cleanly at p.
"""

from __future__ import annotations

import logging
from dataclasses import dataclass
from typing import Sequence

import numpy as np
import sympy

from corner_calculus.arrangement import AffinePSub, sub_from_equations
from corner_calculus.errors import PreconditionError
from corner_calculus.orthant import OrthantChart

logger = logging.getLogger(__name__)

NESTED = "nested"
TRANSVERSAL = "transversal"
DISJOINT_LIFTS = "disjoint_lifts"
TRANSVERSAL_LIFTS = "transversal_lifts"
HYPOTHESES = (NESTED, TRANSVERSAL, DISJOINT_LIFTS, TRANSVERSAL_LIFTS)


@dataclass(frozen=True)
class Configuration:
    hypothesis: str
    chart: OrthantChart
    members: tuple[AffinePSub, ...]
    index_sets: tuple[frozenset[int], ...]

    def by_name(self) -> dict[str, AffinePSub]:
        return {m.name: m for m in self.members}


def interior_chart(n: int) -> OrthantChart:
    return OrthantChart((), tuple(f"x{i}" for i in range(1, n + 1)))


def _random_basis(rng: np.random.Generator, n: int) -> sympy.Matrix:
    while True:
        b = sympy.Matrix(rng.integers(-2, 3, size=(n, n)).tolist())
        if b.det() != 0:
            return b


def _members(
    rng: np.random.Generator, n: int, index_sets: Sequence[frozenset[int]], hypothesis: str
) -> Configuration:
    chart = interior_chart(n)
    b = _random_basis(rng, n)
    p = sympy.Matrix(rng.integers(-2, 3, size=n).tolist())
    w = b * (sympy.Matrix(chart.symbols) - p)
    members = []
    for j, s in enumerate(index_sets, start=1):
        sub = sub_from_equations(chart, [w[i] for i in sorted(s)], name=f"F{j}")
        assert sub is not None
        members.append(sub)
    return Configuration(hypothesis, chart, tuple(members), tuple(index_sets))


def _subset(rng: np.random.Generator, pool: Sequence[int], size: int) -> frozenset[int]:
    return frozenset(int(i) for i in rng.choice(list(pool), size=size, replace=False))


def _index_sets(rng: np.random.Generator, hypothesis: str, n: int) -> list[frozenset[int]]:
    full = list(range(n))
    if hypothesis == NESTED:
        # F1 ⊂ F2: the larger index set cuts out the smaller submanifold
        s2 = _subset(rng, full, int(rng.integers(2, n)))
        extra = _subset(rng, [i for i in full if i not in s2], int(rng.integers(1, n - len(s2) + 1)))
        return [s2 | extra, s2]
    if hypothesis in (TRANSVERSAL, TRANSVERSAL_LIFTS) and n < 4:
        raise PreconditionError(f"{hypothesis} configurations need n >= 4")
    if hypothesis == TRANSVERSAL:
        s1 = _subset(rng, full, 2)
        s2 = _subset(rng, [i for i in full if i not in s1], 2)
        return [s1, s2]
    if hypothesis == DISJOINT_LIFTS:
        # F3 ⊇ F1 ∩ F2 while containing neither: S3 ⊆ S1 ∪ S2, S3 ⊄ S1, S3 ⊄ S2
        s1 = _subset(rng, full, int(rng.integers(1, n)))
        s2 = _subset(rng, [i for i in full if i not in s1], int(rng.integers(1, n - len(s1) + 1)))
        s3 = frozenset({int(rng.choice(sorted(s1))), int(rng.choice(sorted(s2)))})
        return [s1, s2, s3]
    if hypothesis == TRANSVERSAL_LIFTS:
        # F3 ⊂ F1, F2 ⊄ F1, F3 ⊤ F1 ∩ F2 inside F1
        s1 = _subset(rng, full, 2)
        rest = [i for i in full if i not in s1]
        s2_out = _subset(rng, rest, 1)
        s2 = s2_out | _subset(rng, sorted(s1), int(rng.integers(0, 2)))
        free = [i for i in rest if i not in s2]
        s3 = s1 | _subset(rng, free, int(rng.integers(1, len(free) + 1)))
        return [s1, s2, s3]
    raise ValueError(f"Unknown hypothesis '{hypothesis}'. Must be one of {list(HYPOTHESES)}")


def random_configuration(rng: np.random.Generator, hypothesis: str, n: int) -> Configuration:
    if not 3 <= n <= 4:
        raise PreconditionError(f"Random configurations live in dimension 3 or 4, got {n}")
    return _members(rng, n, _index_sets(rng, hypothesis, n), hypothesis)


def random_corpus(seed: int, hypothesis: str, size: int, *, dims: Sequence[int] = (3, 4)) -> list[Configuration]:
    rng = np.random.default_rng(seed)
    allowed = [n for n in dims if hypothesis not in (TRANSVERSAL, TRANSVERSAL_LIFTS) or n >= 4]
    out = [random_configuration(rng, hypothesis, int(rng.choice(allowed))) for _ in range(size)]
    logger.debug("Generated %d %s configurations", len(out), hypothesis)
    return out
