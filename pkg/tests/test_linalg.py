"""
Tests for corner_calculus.linalg
--------------------------------
Coverage:
- Coefficient conversion and its rejections.
- rref / rank / nullspace on small exact matrices.
- Row-space intersection.
- Affine solving (consistent and inconsistent).
- Fourier–Motzkin feasibility with strict and non-strict inequalities.
"""

from fractions import Fraction as Fr

import pytest
import sympy

from corner_calculus.linalg import (
    Inequality,
    fm_feasible,
    in_row_space,
    nullspace,
    orthant_feasible,
    rank,
    rref,
    row_space_intersection,
    solve_affine,
    to_fraction,
)


def F(*xs):
    return [Fr(x) for x in xs]


def test_to_fraction_accepts_exact_inputs():
    assert to_fraction(3) == Fr(3)
    assert to_fraction("2/6") == Fr(1, 3)
    assert to_fraction(sympy.Rational(-5, 4)) == Fr(-5, 4)


def test_to_fraction_rejects_bool_and_irrational():
    with pytest.raises(TypeError):
        to_fraction(True)
    with pytest.raises(TypeError):
        to_fraction(sympy.sqrt(2))


def test_rref_drops_zero_rows_and_reports_pivots():
    rows = [F(1, 2, 3), F(2, 4, 6), F(0, 1, 1)]
    red, pivots = rref(rows, 3)
    assert pivots == (0, 1)
    assert red == [F(1, 0, 1), F(0, 1, 1)]
    assert rank(rows, 3) == 2


def test_nullspace_of_empty_system_is_everything():
    assert nullspace([], 2) == [F(1, 0), F(0, 1)]
    ns = nullspace([F(1, 1)], 2)
    assert len(ns) == 1
    assert ns[0][0] == -ns[0][1]


def test_row_space_intersection_of_two_planes():
    # span{e1, e2} ∩ span{e2, e3} = span{e2}
    out = row_space_intersection([F(1, 0, 0), F(0, 1, 0)], [F(0, 1, 0), F(0, 0, 1)], 3)
    assert out == [F(0, 1, 0)]
    assert row_space_intersection([F(1, 0, 0)], [F(0, 1, 0)], 3) == []


def test_in_row_space():
    assert in_row_space([F(1, 1, 0)], F(2, 2, 0), 3)
    assert not in_row_space([F(1, 1, 0)], F(1, 0, 0), 3)


def test_solve_affine_consistent_and_inconsistent():
    sol = solve_affine([F(1, 1)], [Fr(2)], 2)
    assert sol is not None
    assert sol.point[0] + sol.point[1] == 2
    assert len(sol.directions) == 1
    assert solve_affine([F(1, 1), F(1, 1)], [Fr(1), Fr(2)], 2) is None


def test_fm_strict_versus_non_strict():
    # t >= 0 and -t >= 0 is {0}; t > 0 and -t >= 0 is empty
    weak = [Inequality((Fr(1),), Fr(0), False), Inequality((Fr(-1),), Fr(0), False)]
    strict = [Inequality((Fr(1),), Fr(0), True), Inequality((Fr(-1),), Fr(0), False)]
    assert fm_feasible(weak, 1)
    assert not fm_feasible(strict, 1)


def test_orthant_feasible_line_through_quadrant():
    # x + y = -1 misses the closed quadrant; x - y = 0 meets the open one
    assert not orthant_feasible([F(1, 1)], [Fr(-1)], 2, nonneg=[0, 1])
    assert orthant_feasible([F(1, -1)], [Fr(0)], 2, positive=[0, 1])
    # x + y = 0 touches the closed quadrant only at the corner
    assert orthant_feasible([F(1, 1)], [Fr(0)], 2, nonneg=[0, 1])
    assert not orthant_feasible([F(1, 1)], [Fr(0)], 2, nonneg=[0], positive=[1])
