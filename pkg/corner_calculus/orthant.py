"""
Orthant Charts and Monomial Maps
--------------------------------
Local models [0,∞)^b × ℝ^m with labeled boundary hypersurfaces, the monomial-affine maps
between them, and their classification as b-maps / b-fibrations.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass, field
from fractions import Fraction
from functools import cached_property
from typing import TYPE_CHECKING, Any, Callable, Iterable, Mapping

import sympy

from corner_calculus.errors import DomainError, UnsupportedComposition
from corner_calculus.linalg import to_fraction

if TYPE_CHECKING:
    from corner_calculus.atlas import Atlas

StratumTest = Callable[[Iterable[int]], bool]


def sym(name: str) -> sympy.Symbol:
    """All chart coordinates are real symbols; the name is the identity."""
    return sympy.Symbol(name, real=True)


@dataclass(frozen=True)
class OrthantChart:
    """Coordinates x (boundary, >= 0) then y (interior); boundary names are global labels."""

    boundary: tuple[str, ...]
    interior: tuple[str, ...] = ()

    def __post_init__(self) -> None:
        names = self.boundary + self.interior
        if len(set(names)) != len(names):
            raise DomainError(f"Duplicate coordinate names in chart {names}")

    @property
    def b(self) -> int:
        return len(self.boundary)

    @property
    def m(self) -> int:
        return len(self.interior)

    @property
    def dim(self) -> int:
        return self.b + self.m

    @property
    def names(self) -> tuple[str, ...]:
        return self.boundary + self.interior

    @cached_property
    def symbols(self) -> tuple[sympy.Symbol, ...]:
        return tuple(sym(n) for n in self.names)

    @property
    def boundary_symbols(self) -> tuple[sympy.Symbol, ...]:
        return self.symbols[: self.b]

    @property
    def interior_symbols(self) -> tuple[sympy.Symbol, ...]:
        return self.symbols[self.b :]

    def index(self, name: str) -> int:
        try:
            return self.names.index(name)
        except ValueError:
            raise DomainError(f"No coordinate '{name}' in chart {self.names}") from None

    def is_boundary(self, i: int) -> bool:
        return i < self.b

    def to_json(self) -> dict[str, Any]:
        return {"boundary": list(self.boundary), "interior": list(self.interior)}

    def __str__(self) -> str:
        return f"[{','.join(self.boundary)}|{','.join(self.interior)}]"


@dataclass(frozen=True)
class BoundaryComponent:
    """α · Π x_k^{a_k}; α > 0."""

    alpha: Fraction
    exponents: tuple[int, ...]

    def __post_init__(self) -> None:
        if self.alpha <= 0:
            raise DomainError(f"Boundary coefficient must be positive, got {self.alpha}")


@dataclass(frozen=True)
class MonomialAffineMap:
    """
    Map source -> target. Boundary components are BoundaryComponent or None (identically
    zero); interior components are sympy expressions in source symbols, affine in the
    interior coordinates with Laurent-monomial coefficients in the boundary ones.
    """

    source: OrthantChart
    target: OrthantChart
    boundary: tuple[BoundaryComponent | None, ...]
    interior: tuple[sympy.Expr, ...]
    validity: str = ""

    def __post_init__(self) -> None:
        if len(self.boundary) != self.target.b or len(self.interior) != self.target.m:
            raise DomainError(
                f"Component count does not match target chart {self.target}"
            )
        for comp in self.boundary:
            if comp is not None and len(comp.exponents) != self.source.b:
                raise DomainError("Exponent vector length does not match source chart")

    @classmethod
    def identity(cls, chart: OrthantChart) -> MonomialAffineMap:
        comps = tuple(
            BoundaryComponent(Fraction(1), tuple(int(i == j) for j in range(chart.b)))
            for i in range(chart.b)
        )
        return cls(chart, chart, comps, tuple(chart.interior_symbols))

    def exponent_matrix(self) -> list[list[int]]:
        return [
            list(c.exponents) if c is not None else [0] * self.source.b
            for c in self.boundary
        ]

    def as_expressions(self) -> dict[str, sympy.Expr]:
        xs = self.source.boundary_symbols
        out: dict[str, sympy.Expr] = {}
        for name, comp in zip(self.target.boundary, self.boundary):
            if comp is None:
                out[name] = sympy.Integer(0)
            else:
                mono = sympy.Mul(*(x**a for x, a in zip(xs, comp.exponents)))
                out[name] = sympy.Rational(comp.alpha.numerator, comp.alpha.denominator) * mono
        for name, expr in zip(self.target.interior, self.interior):
            out[name] = expr
        return out

    def to_json(self) -> dict[str, Any]:
        return {
            "source": self.source.to_json(),
            "target": self.target.to_json(),
            "boundary": [
                None
                if c is None
                else {"alpha": _rat(c.alpha), "exponents": list(c.exponents)}
                for c in self.boundary
            ],
            "interior": [str(e) for e in self.interior],
        }


def _rat(q: Fraction) -> str:
    return str(q.numerator) if q.denominator == 1 else f"{q.numerator}/{q.denominator}"


def _monomial(expr: sympy.Expr, xs: tuple[sympy.Symbol, ...]) -> tuple[Fraction, tuple[int, ...]] | None:
    """Split a polynomial into coefficient · monomial in xs, or None."""
    if expr == 0:
        return None
    if not xs:
        return (to_fraction(expr), ()) if expr.is_Rational else None
    if expr.free_symbols - set(xs):
        return None
    poly = sympy.Poly(expr, *xs)
    if len(poly.terms()) != 1:
        return None
    monom, coeff = poly.terms()[0]
    if not coeff.is_Rational:
        return None
    return to_fraction(coeff), tuple(int(a) for a in monom)


def from_expressions(
    source: OrthantChart,
    target: OrthantChart,
    exprs: Mapping[str, sympy.Expr],
    *,
    allow_negative: bool = True,
    validity: str = "",
) -> MonomialAffineMap:
    """Recognize a map given by component expressions; raises UnsupportedComposition."""
    xs = source.boundary_symbols
    ys = set(source.interior_symbols)
    known = set(source.symbols)
    boundary: list[BoundaryComponent | None] = []
    for name in target.boundary:
        e = sympy.cancel(sympy.sympify(exprs[name]))
        if e == 0:
            boundary.append(None)
            continue
        if e.free_symbols & ys:
            raise UnsupportedComposition(
                f"Interior coordinate inside boundary component '{name}': {e}"
            )
        if e.free_symbols - known:
            raise UnsupportedComposition(f"Foreign symbols in component '{name}': {e}")
        num, den = sympy.fraction(e)
        n, d = _monomial(sympy.expand(num), xs), _monomial(sympy.expand(den), xs)
        if n is None or d is None:
            raise UnsupportedComposition(f"Component '{name}' is not monomial: {e}")
        alpha = n[0] / d[0]
        if alpha <= 0:
            raise UnsupportedComposition(f"Component '{name}' has non-positive coefficient")
        exps = tuple(a - b for a, b in zip(n[1], d[1]))
        if not allow_negative and any(a < 0 for a in exps):
            raise UnsupportedComposition(f"Negative exponent in component '{name}'")
        boundary.append(BoundaryComponent(alpha, exps))
    interior: list[sympy.Expr] = []
    for name in target.interior:
        e = sympy.cancel(sympy.sympify(exprs[name]))
        if e.free_symbols - known:
            raise UnsupportedComposition(f"Foreign symbols in component '{name}': {e}")
        num, den = sympy.fraction(e)
        if den.free_symbols & ys or _monomial(sympy.expand(den), xs) is None:
            raise UnsupportedComposition(
                f"Interior component '{name}' has a non-monomial denominator: {e}"
            )
        if not allow_negative and den.free_symbols:
            raise UnsupportedComposition(f"Interior component '{name}' is singular")
        if ys and sympy.Poly(num, *sorted(ys, key=str)).total_degree() > 1:
            raise UnsupportedComposition(f"Interior component '{name}' is not affine: {e}")
        interior.append(e)
    return MonomialAffineMap(source, target, tuple(boundary), tuple(interior), validity)


# ---------------------------------------------------------------------------
# Classification
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class BMapClass:
    kind: str
    b_normal: bool = False
    b_submersion: bool = False
    b_fibration: bool = False
    simple: bool = False
    notes: tuple[str, ...] = field(default=())

    @property
    def is_b_map(self) -> bool:
        return self.kind != "NotBMap"

    def to_json(self) -> dict[str, Any]:
        return {
            "kind": self.kind,
            "b_normal": self.b_normal,
            "b_submersion": self.b_submersion,
            "b_fibration": self.b_fibration,
            "simple": self.simple,
        }


def b_differential(f: MonomialAffineMap) -> sympy.Matrix:
    """Matrix of the b-differential in the frames x∂x, ∂y (rows: target components)."""
    xs = f.source.boundary_symbols
    ys = f.source.interior_symbols
    rows: list[list[sympy.Expr]] = []
    for comp in f.boundary:
        exps = comp.exponents if comp is not None else (0,) * len(xs)
        rows.append([sympy.Integer(a) for a in exps] + [sympy.Integer(0)] * len(ys))
    for g in f.interior:
        rows.append(
            [sympy.expand(x * sympy.diff(g, x)) for x in xs]
            + [sympy.expand(sympy.diff(g, y)) for y in ys]
        )
    return sympy.Matrix(rows) if rows else sympy.zeros(0, f.source.dim)


def _full_rank_on_strata(f: MonomialAffineMap, excluded: StratumTest | None = None) -> bool:
    jac = b_differential(f)
    xs = f.source.boundary_symbols
    for size in range(len(xs) + 1):
        for face in itertools.combinations(range(len(xs)), size):
            if excluded is not None and excluded(face):
                continue
            local = jac.xreplace({xs[i]: 0 for i in face})
            r = local.rank(iszerofunc=lambda e: sympy.expand(e) == 0)
            if r != f.target.dim:
                return False
    return True


def classify_map(f: MonomialAffineMap, *, excluded: StratumTest | None = None) -> BMapClass:
    """
    b-map / b-fibration classification of a monomial-affine map. Source strata that
    `excluded` rejects (by boundary index set) are left out of the rank test.
    """
    comps = [c for c in f.boundary if c is not None]
    if any(a < 0 for c in comps for a in c.exponents):
        return BMapClass("NotBMap", notes=("negative exponent",))
    if any(sympy.fraction(sympy.cancel(g))[1].free_symbols for g in f.interior):
        return BMapClass("NotBMap", notes=("singular interior component",))
    kind = "BoundaryBMap" if len(comps) < len(f.boundary) else "InteriorBMap"
    b_normal = all(
        sum(1 for c in comps if c.exponents[k] != 0) <= 1 for k in range(f.source.b)
    )
    if kind != "InteriorBMap":
        return BMapClass(kind, b_normal=b_normal)
    b_sub = _full_rank_on_strata(f, excluded)
    onto = all(any(a != 0 for a in c.exponents) for c in comps)
    fib = b_normal and b_sub and onto
    simple = fib and all(a in (0, 1) for c in comps for a in c.exponents)
    return BMapClass(kind, b_normal, b_sub, fib, simple)


def compose_maps(f: MonomialAffineMap, g: MonomialAffineMap) -> MonomialAffineMap:
    """f ∘ g."""
    if g.target != f.source:
        raise DomainError(f"Cannot compose: target {g.target} != source {f.source}")
    inner = g.as_expressions()
    subs = {s: inner[n] for s, n in zip(f.source.symbols, f.source.names)}
    outer = {k: sympy.expand(v.xreplace(subs)) for k, v in f.as_expressions().items()}
    return from_expressions(g.source, f.target, outer)


def radial_compactification(m: int) -> Atlas:
    """Closed-ball model of ℝ^m: one interior chart and 2m projective charts at infinity."""
    from corner_calculus.atlas import radial_atlas

    return radial_atlas(m)
