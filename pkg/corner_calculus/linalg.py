"""
Exact Linear Algebra
--------------------
Rational row reduction, row-space arithmetic and Fourier–Motzkin feasibility.

Matrices are plain lists of rows of `Fraction`. Reductions delegate to sympy's exact
`Matrix` over `Rational`; the orthant feasibility kernel is a Fourier–Motzkin
elimination over `Fraction` with strict and non-strict inequalities.
"""

from __future__ import annotations

from fractions import Fraction
from typing import Iterable, NamedTuple, Sequence

import sympy

Row = list[Fraction]
Matrix = list[Row]


def to_fraction(x: object) -> Fraction:
    """Convert ints, strings like "p/q", Fractions and sympy rationals to Fraction."""
    if isinstance(x, Fraction):
        return x
    if isinstance(x, bool):
        raise TypeError("booleans are not coefficients")
    if isinstance(x, int):
        return Fraction(x)
    if isinstance(x, str):
        return Fraction(x)
    if isinstance(x, sympy.Basic):
        r = sympy.nsimplify(x)
        if not r.is_Rational:
            raise TypeError(f"Not an exact rational: {x!r}")
        return Fraction(int(r.p), int(r.q))
    raise TypeError(f"Unsupported coefficient type: {type(x).__name__}")


def to_sympy(rows: Sequence[Sequence[Fraction]], ncols: int) -> sympy.Matrix:
    if not rows:
        return sympy.zeros(0, ncols)
    return sympy.Matrix(
        [[sympy.Rational(c.numerator, c.denominator) for c in r] for r in rows]
    )


def from_sympy(m: sympy.Matrix) -> Matrix:
    return [[to_fraction(m[i, j]) for j in range(m.cols)] for i in range(m.rows)]


def rref(rows: Sequence[Sequence[Fraction]], ncols: int) -> tuple[Matrix, tuple[int, ...]]:
    """Reduced row echelon form with zero rows dropped, plus pivot columns."""
    if not rows:
        return [], ()
    red, pivots = to_sympy(rows, ncols).rref()
    out = from_sympy(red)[: len(pivots)]
    return out, tuple(int(p) for p in pivots)


def rank(rows: Sequence[Sequence[Fraction]], ncols: int) -> int:
    return len(rref(rows, ncols)[1])


def nullspace(rows: Sequence[Sequence[Fraction]], ncols: int) -> Matrix:
    """Basis (as rows) of {v : rows · v = 0}."""
    if ncols == 0:
        return []
    if not rows:
        return [[Fraction(int(i == j)) for j in range(ncols)] for i in range(ncols)]
    basis = to_sympy(rows, ncols).nullspace()
    return [[to_fraction(v[j]) for j in range(ncols)] for v in basis]


def row_basis(rows: Sequence[Sequence[Fraction]], ncols: int) -> Matrix:
    return rref(rows, ncols)[0]


def in_row_space(rows: Sequence[Sequence[Fraction]], v: Sequence[Fraction], ncols: int) -> bool:
    return rank(list(rows) + [list(v)], ncols) == rank(rows, ncols)


def row_space_intersection(
    a: Sequence[Sequence[Fraction]], b: Sequence[Sequence[Fraction]], ncols: int
) -> Matrix:
    """Basis of rowspace(a) ∩ rowspace(b)."""
    a = row_basis(a, ncols)
    b = row_basis(b, ncols)
    if not a or not b:
        return []
    # λ·a = μ·b  <=>  [a; -b]^T (λ, μ) = 0
    stacked = [list(r) for r in a] + [[-c for c in r] for r in b]
    transposed = [[stacked[i][j] for i in range(len(stacked))] for j in range(ncols)]
    out: Matrix = []
    for sol in nullspace(transposed, len(stacked)):
        lam = sol[: len(a)]
        out.append([sum((lam[i] * a[i][j] for i in range(len(a))), Fraction(0)) for j in range(ncols)])
    return row_basis(out, ncols)


class AffineSolution(NamedTuple):
    """Solution set w = point + Σ t_k · directions[k]."""

    point: Row
    directions: Matrix


def solve_affine(
    rows: Sequence[Sequence[Fraction]], rhs: Sequence[Fraction], ncols: int
) -> AffineSolution | None:
    """Solve rows · w = rhs exactly; None when inconsistent."""
    if not rows:
        return AffineSolution([Fraction(0)] * ncols, nullspace([], ncols))
    aug = [list(r) + [rhs[i]] for i, r in enumerate(rows)]
    red, pivots = rref(aug, ncols + 1)
    if ncols in pivots:
        return None
    point = [Fraction(0)] * ncols
    for i, p in enumerate(pivots):
        point[p] = red[i][ncols]
    return AffineSolution(point, nullspace(rows, ncols))


# ---------------------------------------------------------------------------
# Fourier–Motzkin
# ---------------------------------------------------------------------------


class Inequality(NamedTuple):
    """coeffs · t + const >= 0, or > 0 when strict."""

    coeffs: tuple[Fraction, ...]
    const: Fraction
    strict: bool


def _normalize(ineq: Inequality) -> Inequality:
    scale = next((abs(c) for c in ineq.coeffs if c != 0), None)
    if scale is None or scale == 1:
        return ineq
    return Inequality(
        tuple(c / scale for c in ineq.coeffs), ineq.const / scale, ineq.strict
    )


def _eliminate(system: list[Inequality], j: int) -> list[Inequality]:
    pos = [q for q in system if q.coeffs[j] > 0]
    neg = [q for q in system if q.coeffs[j] < 0]
    out = {q for q in system if q.coeffs[j] == 0}
    for p in pos:
        for n in neg:
            a, b = p.coeffs[j], -n.coeffs[j]
            coeffs = tuple(p.coeffs[k] * b + n.coeffs[k] * a for k in range(len(p.coeffs)))
            out.add(_normalize(Inequality(coeffs, p.const * b + n.const * a, p.strict or n.strict)))
    return list(out)


def fm_feasible(system: Iterable[Inequality], nvars: int) -> bool:
    """Decide whether a system of (strict) linear inequalities has a rational solution."""
    current = list({_normalize(q) for q in system})
    for j in range(nvars):
        current = _eliminate(current, j)
    for q in current:
        if q.strict and not q.const > 0:
            return False
        if not q.const >= 0:
            return False
    return True


def orthant_feasible(
    rows: Sequence[Sequence[Fraction]],
    rhs: Sequence[Fraction],
    ncols: int,
    *,
    nonneg: Iterable[int] = (),
    positive: Iterable[int] = (),
) -> bool:
    """
    Is {rows · w = rhs, w_i >= 0 (i in nonneg), w_i > 0 (i in positive)} nonempty?
    Equalities are solved first so elimination only runs over the free parameters.
    """
    sol = solve_affine(rows, rhs, ncols)
    if sol is None:
        return False
    k = len(sol.directions)
    system: list[Inequality] = []
    strict_idx = set(positive)
    for i in set(nonneg) | strict_idx:
        coeffs = tuple(sol.directions[t][i] for t in range(k))
        system.append(Inequality(coeffs, sol.point[i], i in strict_idx))
    return fm_feasible(system, k)
