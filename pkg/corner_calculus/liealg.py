"""
Lie Algebroid Bracket
---------------------
Polynomial vector fields on linear model charts and the simplicial bracket: a section
V of null((Π_R)_*) along the diagonal is extended to M[2] by solving

    (Π_F)_* W = 0,   (Π_S)_* W = V(Π_S q)   at q = S_{(1,1,2)}(p) in D_{1,2},

and pushing forward, Ṽ = (Π_C)_* W. The bracket is the commutator of extensions
restricted to the diagonal; the anchor is (Π_L)_*.
"""

from __future__ import annotations

import logging
from dataclasses import dataclass
from typing import Any, Mapping

import sympy

from corner_calculus.errors import DomainError, ModelError, PreconditionError
from corner_calculus.finsetcat import FinSetMap
from corner_calculus.genprod import GeneralizedProductModel, compose_exprs, structure_map
from corner_calculus.orthant import OrthantChart
from corner_calculus.serialize import poly_terms

logger = logging.getLogger(__name__)

DIAGONAL_PARAMETRIZATION = FinSetMap((1, 1, 2), 2)


@dataclass(frozen=True)
class PolyVectorField:
    """Σ c_i ∂_{x_i}; components are in the plain ∂ frame."""

    chart: OrthantChart
    components: tuple[sympy.Expr, ...]
    b_flag: bool = False

    def __post_init__(self) -> None:
        if len(self.components) != self.chart.dim:
            raise DomainError(f"Expected {self.chart.dim} components, got {len(self.components)}")
        foreign = set().union(*(sympy.sympify(c).free_symbols for c in self.components)) - set(self.chart.symbols)
        if foreign:
            raise DomainError(f"Coefficients use symbols {sorted(map(str, foreign))} outside {self.chart}")
        if self.b_flag:
            for x, c in zip(self.chart.boundary_symbols, self.components):
                if c != 0 and sympy.rem(sympy.expand(c), x, x) != 0:
                    raise DomainError(f"Field is not tangent to {{{x} = 0}}")

    @classmethod
    def of(cls, chart: OrthantChart, comps: Mapping[str, Any], b_flag: bool = False) -> PolyVectorField:
        unknown = set(comps) - set(chart.names)
        if unknown:
            raise DomainError(f"Unknown directions {sorted(unknown)} for chart {chart}")
        local = {s.name: s for s in chart.symbols}
        return cls(
            chart,
            tuple(sympy.expand(sympy.sympify(comps.get(n, 0), locals=local)) for n in chart.names),
            b_flag,
        )

    @classmethod
    def zero(cls, chart: OrthantChart) -> PolyVectorField:
        return cls(chart, (sympy.Integer(0),) * chart.dim)

    def as_dict(self) -> dict[str, sympy.Expr]:
        return {n: c for n, c in zip(self.chart.names, self.components) if c != 0}

    def degree(self) -> int:
        degs = [sympy.Poly(c, *self.chart.symbols).total_degree() for c in self.components if c != 0]
        return max(degs, default=0)

    def apply(self, f: sympy.Expr) -> sympy.Expr:
        return sympy.expand(
            sum((c * sympy.diff(f, x) for c, x in zip(self.components, self.chart.symbols)), sympy.Integer(0))
        )

    def __add__(self, other: PolyVectorField) -> PolyVectorField:
        _same_chart(self, other)
        return PolyVectorField(
            self.chart, tuple(sympy.expand(a + b) for a, b in zip(self.components, other.components))
        )

    def scale(self, f: sympy.Expr) -> PolyVectorField:
        return PolyVectorField(self.chart, tuple(sympy.expand(f * c) for c in self.components))

    def is_zero(self) -> bool:
        return all(sympy.expand(c) == 0 for c in self.components)

    def to_json(self) -> dict[str, Any]:
        return {
            "chart": self.chart.to_json(),
            "components": {
                n: poly_terms(c, self.chart) for n, c in zip(self.chart.names, self.components) if c != 0
            },
        }


def _same_chart(a: PolyVectorField, b: PolyVectorField) -> None:
    if a.chart != b.chart:
        raise DomainError(f"Vector fields live on different charts: {a.chart} vs {b.chart}")


def commutator(a: PolyVectorField, b: PolyVectorField) -> PolyVectorField:
    """[a, b]^i = a(b^i) - b(a^i)."""
    _same_chart(a, b)
    return PolyVectorField(
        a.chart,
        tuple(sympy.expand(a.apply(bi) - b.apply(ai)) for ai, bi in zip(a.components, b.components)),
    )


@dataclass(frozen=True)
class AlgebroidSection:
    """A field on M[1] with values in the first-factor directions of M[2] along the diagonal."""

    model: GeneralizedProductModel
    components: tuple[tuple[str, sympy.Expr], ...]

    @classmethod
    def of(cls, model: GeneralizedProductModel, comps: Mapping[str, Any]) -> AlgebroidSection:
        directions = model.factor(2, 1)
        unknown = set(comps) - set(directions)
        if unknown:
            raise DomainError(f"Directions {sorted(unknown)} are not first-factor directions {directions}")
        m1 = model.ambient(1)
        local = {s.name: s for s in m1.symbols}
        out = []
        for n in directions:
            c = sympy.expand(sympy.sympify(comps.get(n, 0), locals=local))
            foreign = c.free_symbols - set(m1.symbols)
            if foreign:
                raise DomainError(f"Coefficient of {n} uses {sorted(map(str, foreign))}, not M[1] coordinates")
            out.append((n, c))
        return cls(model, tuple(out))

    def as_dict(self) -> dict[str, sympy.Expr]:
        return {n: c for n, c in self.components if c != 0}

    def degree(self) -> int:
        m1 = self.model.ambient(1)
        degs = [sympy.Poly(c, *m1.symbols).total_degree() if m1.dim else 0 for _, c in self.components if c != 0]
        return max(degs, default=0)

    def on_m2(self, at: Mapping[sympy.Symbol, sympy.Expr]) -> sympy.Matrix:
        """Column vector in M[2] coordinates with M[1] symbols replaced via `at`."""
        m2 = self.model.ambient(2)
        comps = dict(self.components)
        return sympy.Matrix(
            [sympy.expand(sympy.sympify(comps.get(n, 0)).xreplace(dict(at))) for n in m2.names]
        )

    def is_zero(self) -> bool:
        return all(c == 0 for _, c in self.components)

    def to_json(self) -> dict[str, Any]:
        m1 = self.model.ambient(1)
        return {"components": {n: poly_terms(c, m1) for n, c in self.components if c != 0}}


def _jacobian(exprs: Mapping[str, sympy.Expr], target: OrthantChart, source: OrthantChart) -> sympy.Matrix:
    if not target.dim:
        return sympy.zeros(0, source.dim)
    return sympy.Matrix([[sympy.diff(exprs[n], x) for x in source.symbols] for n in target.names])


def _check_model(model: GeneralizedProductModel, *sections: AlgebroidSection, max_degree: int | None) -> None:
    if model.K < 3:
        raise PreconditionError("The simplicial bracket needs M[3] (K >= 3)")
    for s in sections:
        if s.model is not model and s.model.kind != model.kind:
            raise DomainError("Section belongs to a different model")
        if max_degree is not None and s.degree() > max_degree:
            raise PreconditionError(f"Section degree {s.degree()} exceeds cap {max_degree}")


def simplicial_extend(
    v: AlgebroidSection, model: GeneralizedProductModel, *, max_degree: int | None = None
) -> PolyVectorField:
    _check_model(model, v, max_degree=max_degree)
    m1, m2, m3 = model.ambient(1), model.ambient(2), model.ambient(3)
    gens = model.generators
    q = structure_map(model, DIAGONAL_PARAMETRIZATION)
    pi_f = structure_map(model, gens["Pi_F"])
    pi_s = structure_map(model, gens["Pi_S"])
    pi_c = structure_map(model, gens["Pi_C"])
    foot = compose_exprs(compose_exprs(structure_map(model, gens["Pi_L"]), pi_s), q)
    at_foot = {s: foot[n] for s, n in zip(m1.symbols, m1.names)}

    a = _jacobian(pi_f, m2, m3).col_join(_jacobian(pi_s, m2, m3))
    b = sympy.zeros(m2.dim, 1).col_join(v.on_m2(at_foot))
    try:
        sol, params = a.gauss_jordan_solve(b)
    except ValueError as exc:
        raise ModelError(f"(Π_S)_* is not onto the section at the diagonal: {exc}") from exc
    if params.shape[0]:
        raise ModelError("Pushforward by (Π_F, Π_S) is not injective on D_{1,2}")
    ext = _jacobian(pi_c, m2, m3) * sol
    return PolyVectorField(m2, tuple(sympy.expand(c) for c in ext))


def restrict_to_diagonal(field: PolyVectorField, model: GeneralizedProductModel) -> AlgebroidSection:
    d = structure_map(model, model.generators["D"])
    at = {s: d[n] for s, n in zip(field.chart.symbols, field.chart.names)}
    directions = set(model.factor(2, 1))
    comps: dict[str, sympy.Expr] = {}
    for n, c in zip(field.chart.names, field.components):
        value = sympy.expand(c.xreplace(at))
        if n in directions:
            comps[n] = value
        elif value != 0:
            raise ModelError(f"Restricted field has a component along {n}, outside null((Π_R)_*)")
    return AlgebroidSection.of(model, comps)


def bracket(
    v1: AlgebroidSection, v2: AlgebroidSection, model: GeneralizedProductModel, *, max_degree: int | None = None
) -> AlgebroidSection:
    e1 = simplicial_extend(v1, model, max_degree=max_degree)
    e2 = simplicial_extend(v2, model, max_degree=max_degree)
    out = restrict_to_diagonal(commutator(e1, e2), model)
    logger.debug("Bracket of degree-%d and degree-%d sections", v1.degree(), v2.degree())
    return out


def anchor(v: AlgebroidSection, model: GeneralizedProductModel) -> PolyVectorField:
    m1, m2 = model.ambient(1), model.ambient(2)
    pi_l = structure_map(model, model.generators["Pi_L"])
    at = {s: s for s in m1.symbols}
    vec = _jacobian(pi_l, m1, m2) * v.on_m2(at)
    return PolyVectorField(m1, tuple(sympy.expand(c) for c in vec))


def algebroid_generators(model: GeneralizedProductModel) -> list[AlgebroidSection]:
    """The model's reported generator family as sections."""
    return [AlgebroidSection.of(model, g) for g in model.algebroid]

