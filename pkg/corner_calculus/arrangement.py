"""
Affine Arrangements
-------------------
Affine p-submanifold candidates in a chart, pairwise relations, p-positioning and
p-cleanness via common adapted coordinates, intersection closure and order classes.

A submanifold is stored normalized: the boundary coordinates forced to vanish are moved
into `zeros`, the remaining equations are in reduced row echelon form with those columns
cleared. Two normalized subs are equal as sets iff they are equal as values.
"""

from __future__ import annotations

import itertools
import logging
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Callable, Iterable, Sequence

import sympy

from corner_calculus.errors import DomainError, PreconditionError
from corner_calculus.finsetcat import Partition, non_discrete_partitions
from corner_calculus.linalg import (
    Matrix,
    orthant_feasible,
    rank,
    rref,
    solve_affine,
    to_fraction,
)
from corner_calculus.orthant import OrthantChart

logger = logging.getLogger(__name__)

SIZE_ORDER = "SizeOrder"
INTERSECTION_ORDER = "IntersectionOrder"
NEITHER = "Neither"

ExclusionTest = Callable[["AffinePSub"], bool]


@dataclass(frozen=True)
class AffinePSub:
    chart: OrthantChart
    zeros: frozenset[int]
    rows: tuple[tuple[Fraction, ...], ...]
    rhs: tuple[Fraction, ...]
    name: str = field(default="", compare=False)

    @property
    def n(self) -> int:
        return self.chart.dim

    @property
    def codim(self) -> int:
        return len(self.zeros) + len(self.rows)

    @property
    def dim(self) -> int:
        return self.n - self.codim

    def conormal(self) -> Matrix:
        """Rows spanning the conormal space: dx_i for zeros, then the equations."""
        units = [[Fraction(int(j == i)) for j in range(self.n)] for i in sorted(self.zeros)]
        return units + [list(r) for r in self.rows]

    def affine_functions(self) -> Matrix:
        """Rows (a | -c) of the affine functions a·w - c vanishing on the sub."""
        return [r + [Fraction(0)] for r in self.conormal()[: len(self.zeros)]] + [
            list(r) + [-c] for r, c in zip(self.rows, self.rhs)
        ]

    def full_rhs(self) -> list[Fraction]:
        return [Fraction(0)] * len(self.zeros) + list(self.rhs)

    def equations(self) -> list[sympy.Expr]:
        """Polynomials (affine) whose common zero set is the sub."""
        syms = self.chart.symbols
        out: list[sympy.Expr] = [syms[i] for i in sorted(self.zeros)]
        for row, c in zip(self.rows, self.rhs):
            expr = sum((_q(a) * s for a, s in zip(row, syms)), sympy.Integer(0))
            out.append(expr - _q(c))
        return out

    def parametrize(self) -> tuple[list[sympy.Expr], list[sympy.Symbol]]:
        """Coordinates as affine functions of fresh parameters t_k."""
        sol = solve_affine(self.conormal(), self.full_rhs(), self.n)
        if sol is None:
            raise DomainError(f"Sub {self.label()} is empty")
        params = [sympy.Symbol(f"_t{k}", real=True) for k in range(len(sol.directions))]
        coords = [
            _q(sol.point[i])
            + sum((_q(d[i]) * t for d, t in zip(sol.directions, params)), sympy.Integer(0))
            for i in range(self.n)
        ]
        return coords, params

    def meets_stratum(self, face: Iterable[int]) -> bool:
        """Nonempty intersection with {x_F = 0, other boundary coordinates > 0}."""
        face = set(face)
        rows = self.conormal() + [
            [Fraction(int(j == i)) for j in range(self.n)] for i in sorted(face)
        ]
        rhs = self.full_rhs() + [Fraction(0)] * len(face)
        b = range(self.chart.b)
        return orthant_feasible(
            rows, rhs, self.n, nonneg=b, positive=[i for i in b if i not in face]
        )

    def strata(self, excluded: ExclusionTest | None = None) -> list[frozenset[int]]:
        """Boundary strata met, skipping those whose part of the sub `excluded` rejects."""
        rest = [i for i in range(self.chart.b) if i not in self.zeros]
        out = []
        for size in range(len(rest) + 1):
            for extra in itertools.combinations(rest, size):
                face = frozenset(self.zeros | set(extra))
                if not self.meets_stratum(face):
                    continue
                if excluded is not None and excluded(self.on_face(face)):
                    continue
                out.append(face)
        return out

    def on_face(self, face: Iterable[int]) -> AffinePSub:
        """The sub cut down to the closed face {x_F = 0}; only for faces it meets."""
        part = normalize(self.chart, self.zeros | set(face), self.rows, self.rhs, self.name)
        if part is None:
            raise DomainError(f"Sub {self.label()} misses the face {sorted(face)}")
        return part

    def contains(self, other: AffinePSub) -> bool:
        """other ⊆ self."""
        base = other.affine_functions()
        return rank(base + self.affine_functions(), self.n + 1) == rank(base, self.n + 1)

    def with_name(self, name: str) -> AffinePSub:
        return AffinePSub(self.chart, self.zeros, self.rows, self.rhs, name)

    def label(self) -> str:
        return self.name or " , ".join(f"{e} = 0" for e in self.equations())

    def to_json(self) -> dict[str, object]:
        return {
            "name": self.name,
            "zero_hypersurfaces": [self.chart.names[i] for i in sorted(self.zeros)],
            "equations": {
                "matrix": [[_s(a) for a in r] for r in self.rows],
                "rhs": [_s(c) for c in self.rhs],
            },
        }


def _q(x: Fraction) -> sympy.Rational:
    return sympy.Rational(x.numerator, x.denominator)


def _s(x: Fraction) -> str:
    return str(x.numerator) if x.denominator == 1 else f"{x.numerator}/{x.denominator}"


def normalize(
    chart: OrthantChart,
    zeros: Iterable[int],
    rows: Sequence[Sequence[Fraction]],
    rhs: Sequence[Fraction],
    name: str = "",
) -> AffinePSub | None:
    """Normalized sub, or None when the system has no point in the closed orthant."""
    n = chart.dim
    zero_set = set(zeros)
    if any(not chart.is_boundary(i) for i in zero_set):
        raise DomainError("Zero hypersurfaces must be boundary coordinates")

    def system() -> tuple[Matrix, list[Fraction]]:
        units = [[Fraction(int(j == i)) for j in range(n)] for i in sorted(zero_set)]
        return units + [list(r) for r in rows], [Fraction(0)] * len(units) + list(rhs)

    a, c = system()
    boundary = range(chart.b)
    if not orthant_feasible(a, c, n, nonneg=boundary):
        return None
    for j in boundary:
        if j not in zero_set and not orthant_feasible(
            a, c, n, nonneg=boundary, positive=[j]
        ):
            zero_set.add(j)
    a, c = system()
    cleared = [
        [Fraction(0) if j in zero_set else row[j] for j in range(n)] + [c[i]]
        for i, row in enumerate(a)
    ]
    red, pivots = rref(cleared, n + 1)
    if n in pivots:
        return None
    red_rows = tuple(tuple(r[:n]) for r in red)
    red_rhs = tuple(r[n] for r in red)
    return AffinePSub(chart, frozenset(zero_set), red_rows, red_rhs, name)


def linear_row(expr: sympy.Expr, chart: OrthantChart) -> tuple[list[Fraction], Fraction]:
    """Coefficients and right-hand side of an affine expression `expr = 0`."""
    expr = sympy.expand(sympy.sympify(expr))
    foreign = expr.free_symbols - set(chart.symbols)
    if foreign:
        raise DomainError(f"Symbols {sorted(map(str, foreign))} not in chart {chart}")
    poly = sympy.Poly(expr, *chart.symbols)
    if poly.total_degree() > 1:
        raise DomainError(f"Equation is not affine: {expr}")
    row = [to_fraction(poly.coeff_monomial(s)) for s in chart.symbols]
    const = to_fraction(poly.coeff_monomial(1))
    return row, -const


def sub_from_equations(
    chart: OrthantChart,
    equations: Iterable[sympy.Expr | str],
    *,
    zeros: Iterable[str] = (),
    name: str = "",
) -> AffinePSub | None:
    """Build from `expr = 0` equations plus boundary coordinate names set to zero."""
    rows, rhs = [], []
    local = {s.name: s for s in chart.symbols}
    for e in equations:
        expr = sympy.sympify(e, locals=local) if isinstance(e, str) else e
        r, c = linear_row(expr, chart)
        rows.append(r)
        rhs.append(c)
    return normalize(chart, [chart.index(z) for z in zeros], rows, rhs, name)


def intersect(p: AffinePSub, q: AffinePSub) -> AffinePSub | None:
    if p.chart != q.chart:
        raise DomainError("Cannot intersect subs from different charts")
    return normalize(
        p.chart, p.zeros | q.zeros, list(p.rows) + list(q.rows), list(p.rhs) + list(q.rhs)
    )


# ---------------------------------------------------------------------------
# Adapted coordinates
# ---------------------------------------------------------------------------


def _section_equations(
    conormal: Matrix,
    z_idx: Sequence[int],
    rest_idx: Sequence[int],
    tvars: dict[tuple[int, int], sympy.Symbol],
    tag: str,
) -> list[sympy.Expr]:
    proj = [[r[c] for c in rest_idx] for r in conormal]
    q_basis, _ = rref(proj, len(rest_idx))
    eqs: list[sympy.Expr] = []
    for qi, q in enumerate(q_basis):
        lam = [sympy.Symbol(f"_l{tag}_{qi}_{i}") for i in range(len(conormal))]
        for pos, c in enumerate(rest_idx):
            eqs.append(sum((l * _q(r[c]) for l, r in zip(lam, conormal)), sympy.Integer(0)) - _q(q[pos]))
        for k in z_idx:
            target = sum(
                (_q(q[pos]) * tvars[(c, k)] for pos, c in enumerate(rest_idx) if (c, k) in tvars),
                sympy.Integer(0),
            )
            eqs.append(sum((l * _q(r[k]) for l, r in zip(lam, conormal)), sympy.Integer(0)) - target)
    return eqs


def adapted_section(
    conormals: Sequence[Matrix],
    z_idx: Sequence[int],
    rest_idx: Sequence[int],
    *,
    frozen: Iterable[int] = (),
    greedy: bool = False,
) -> tuple[dict[tuple[int, int], Fraction], list[int]] | None:
    """
    Solve for T with v_l = w_l + Σ_k T[l,k] z_k such that every conormal splits as
    (part in span dz) ⊕ (part in span dv). Rows of `frozen` coordinates keep T = 0.

    Returns (T, indices of conormals honoured). Without `greedy` all must be honoured
    or None is returned; with `greedy` members that would break solvability are skipped.
    """
    frozen = set(frozen)
    tvars = {
        (c, k): sympy.Symbol(f"_T_{c}_{k}")
        for c in rest_idx
        if c not in frozen
        for k in z_idx
    }
    accepted: list[int] = []
    system: list[sympy.Expr] = []
    for idx, cn in enumerate(conormals):
        trial = system + _section_equations(cn, z_idx, rest_idx, tvars, str(idx))
        if _solvable(trial):
            system = trial
            accepted.append(idx)
        elif not greedy:
            return None
    solution = _solve(system, list(tvars.values()))
    if solution is None:
        return None
    return {key: solution.get(v, Fraction(0)) for key, v in tvars.items()}, accepted


def _solvable(eqs: list[sympy.Expr]) -> bool:
    if not eqs:
        return True
    unknowns = sorted(set().union(*(e.free_symbols for e in eqs)), key=str)
    return sympy.linsolve(eqs, unknowns) != sympy.S.EmptySet


def _solve(eqs: list[sympy.Expr], wanted: list[sympy.Symbol]) -> dict[sympy.Symbol, Fraction] | None:
    if not eqs:
        return {}
    unknowns = sorted(set().union(*(e.free_symbols for e in eqs)) | set(wanted), key=str)
    sols = sympy.linsolve(eqs, unknowns)
    if sols == sympy.S.EmptySet:
        return None
    values = next(iter(sols))
    free = set().union(*(sympy.sympify(v).free_symbols for v in values))
    zero = {s: 0 for s in free}
    return {
        u: to_fraction(sympy.sympify(v).xreplace(zero))
        for u, v in zip(unknowns, values)
        if u in wanted
    }


# ---------------------------------------------------------------------------
# Predicates
# ---------------------------------------------------------------------------


def is_p_positioned(sub: AffinePSub, *, excluded: ExclusionTest | None = None) -> bool:
    """
    At each stratum met, the conormal meets span{dx_F} in a coordinate subspace. Strata
    whose part of the sub `excluded` rejects are not checked.
    """
    n = sub.n
    cn = sub.conormal()
    r = len(cn)
    for face in sub.strata(excluded):
        units = [[Fraction(int(j == i)) for j in range(n)] for i in sorted(face)]
        meet = r + len(face) - rank(cn + units, n)
        if meet != len(sub.zeros):
            logger.debug("Sub %s not p-positioned at stratum %s", sub.label(), sorted(face))
            return False
    return True


def is_p_clean(
    family: Sequence[AffinePSub], *, excluded: ExclusionTest | None = None
) -> bool:
    """One adapted coordinate system normalizes every member near each point."""
    members = list(family)
    if not members:
        return True
    if any(not is_p_positioned(p, excluded=excluded) for p in members):
        return False
    n = members[0].n
    for flat in intersection_closure(members):
        if excluded is not None and excluded(flat):
            continue
        through = [p for p in members if p.contains(flat)]
        if len(through) < 2:
            continue
        for face in flat.strata(excluded):
            z_idx = sorted(face)
            rest = [i for i in range(n) if i not in face]
            if adapted_section([p.conormal() for p in through], z_idx, rest) is None:
                logger.debug(
                    "No common adapted coordinates at %s (stratum %s)",
                    flat.label(),
                    sorted(face),
                )
                return False
    return True


def relation(p: AffinePSub, q: AffinePSub) -> str:
    meet = intersect(p, q)
    if meet is None:
        return "Disjoint"
    if p == q:
        return "Equal"
    if meet == q:
        return "FirstContainsSecond"
    if meet == p:
        return "SecondContainsFirst"
    cn = p.conormal() + q.conormal()
    if rank(cn, p.n) == p.codim + q.codim:
        return "Transversal"
    if is_p_clean([p, q]):
        return "CleanNonTransversal"
    return "NotClean"


def intersection_closure(family: Sequence[AffinePSub]) -> list[AffinePSub]:
    """Smallest superfamily closed under nonempty pairwise intersection."""
    out: list[AffinePSub] = []
    for p in family:
        if p not in out:
            out.append(p)
    changed = True
    while changed:
        changed = False
        for p, q in itertools.combinations(list(out), 2):
            meet = intersect(p, q)
            if meet is not None and meet not in out:
                names = sorted(filter(None, (p.name, q.name)))
                out.append(meet.with_name("∩".join(names)) if len(names) == 2 else meet)
                changed = True
    return out


def is_intersection_closed(family: Sequence[AffinePSub]) -> bool:
    return len(intersection_closure(family)) == len(set(family))


def order_class(ordered: Sequence[AffinePSub]) -> str:
    """SizeOrder, IntersectionOrder or Neither for an intersection-closed ordered family."""
    if not is_intersection_closed(ordered):
        raise PreconditionError("order_class needs an intersection-closed family")
    pos = {p: i for i, p in enumerate(ordered)}
    intersection = True
    for i, j in itertools.combinations(range(len(ordered)), 2):
        meet = intersect(ordered[i], ordered[j])
        if meet is not None and pos[meet] > j:
            intersection = False
            break
    size = all(a.dim <= b.dim for a, b in zip(ordered, ordered[1:]))
    if size:
        if not intersection:
            raise PreconditionError("Size order failed the intersection rule")
        return SIZE_ORDER
    return INTERSECTION_ORDER if intersection else NEITHER


def size_order(family: Sequence[AffinePSub]) -> list[AffinePSub]:
    """Stable sort by dimension."""
    return sorted(family, key=lambda p: p.dim)


# ---------------------------------------------------------------------------
# Multidiagonals
# ---------------------------------------------------------------------------


def fibre_names(prefix: str, i: int, kappa: int) -> list[str]:
    if kappa == 1:
        return [f"{prefix}{i}"]
    return [f"{prefix}{i}_{c}" for c in range(1, kappa + 1)]


def diagonal_equations(
    partition: Partition, blocks: Sequence[Sequence[str]]
) -> list[sympy.Expr]:
    """z_i = z_j coordinatewise for i, j in one block; `blocks[i-1]` names factor i."""
    out: list[sympy.Expr] = []
    for block in partition.blocks:
        for a, b in zip(block, block[1:]):
            for na, nb in zip(blocks[a - 1], blocks[b - 1]):
                out.append(sympy.Symbol(na, real=True) - sympy.Symbol(nb, real=True))
    return out


def diagonal_name(partition: Partition) -> str:
    return f"D[{partition.label()}]"


def diagonal_chart(k: int, kappa: int, scl: bool) -> OrthantChart:
    interior = tuple(n for i in range(1, k + 1) for n in fibre_names("z", i, kappa))
    return OrthantChart(("eps",) if scl else (), interior)


def diagonal_family(k: int, kappa: int, scl: bool = False) -> list[AffinePSub]:
    """{D_P} over non-discrete partitions of J(k) in ℝ^{kκ}, or {0}×D_P when scl."""
    if k < 2 or kappa < 1:
        raise PreconditionError(f"diagonal_family needs k >= 2 and kappa >= 1, got {k}, {kappa}")
    chart = diagonal_chart(k, kappa, scl)
    blocks = [fibre_names("z", i, kappa) for i in range(1, k + 1)]
    out = []
    for p in non_discrete_partitions(k):
        sub = sub_from_equations(
            chart,
            diagonal_equations(p, blocks),
            zeros=("eps",) if scl else (),
            name=diagonal_name(p),
        )
        assert sub is not None
        out.append(sub)
    return out
