"""
Serialization
-------------
Canonical JSON forms: rationals as "p/q" strings, polynomials as monomial lists, and the
family documents read by the CLI.
"""

from __future__ import annotations

from fractions import Fraction
from typing import Any

import sympy

from corner_calculus.errors import DomainError
from corner_calculus.orthant import OrthantChart
from corner_calculus.validator import require_keys


def rational_str(x: Fraction | int | sympy.Rational) -> str:
    q = Fraction(int(x.p), int(x.q)) if isinstance(x, sympy.Rational) else Fraction(x)
    return str(q.numerator) if q.denominator == 1 else f"{q.numerator}/{q.denominator}"


def poly_terms(expr: sympy.Expr, chart: OrthantChart) -> list[dict[str, Any]]:
    """[{"coeff": "p/q", "exponents": {name: k}}] sorted by exponent vector."""
    expr = sympy.expand(expr)
    if expr == 0:
        return []
    if not chart.dim:
        return [{"coeff": rational_str(sympy.Rational(expr)), "exponents": {}}]
    poly = sympy.Poly(expr, *chart.symbols)
    out = []
    for monom, coeff in sorted(poly.terms()):
        out.append(
            {
                "coeff": rational_str(sympy.Rational(coeff)),
                "exponents": {n: int(k) for n, k in zip(chart.names, monom) if k},
            }
        )
    return out


def canonical(obj: Any) -> Any:
    """Recursively replace Fractions and sympy numbers by "p/q" strings, sets by sorted lists."""
    if isinstance(obj, Fraction):
        return rational_str(obj)
    if isinstance(obj, sympy.Rational):
        return rational_str(obj)
    if isinstance(obj, sympy.Basic):
        return str(obj)
    if isinstance(obj, dict):
        return {str(k): canonical(v) for k, v in obj.items()}
    if isinstance(obj, (set, frozenset)):
        return sorted(canonical(v) for v in obj)
    if isinstance(obj, (list, tuple)):
        return [canonical(v) for v in obj]
    return obj


def chart_from_json(doc: dict[str, Any]) -> OrthantChart:
    require_keys(doc, ["boundary"], ["interior"], path="chart")
    return OrthantChart(tuple(doc["boundary"]), tuple(doc.get("interior", [])))


def family_from_json(doc: dict[str, Any]) -> tuple[OrthantChart, dict[str, Any]]:
    """
    Parse {"chart": ..., "submanifolds": {id: {"zeros": [...], "equations": [...]}}}.
    Returns the chart and a dict of AffinePSub keyed by id (empty subs are rejected).
    """
    from corner_calculus.arrangement import sub_from_equations

    require_keys(doc, ["chart", "submanifolds"], ["order", "tracked", "name"])
    chart = chart_from_json(doc["chart"])
    subs: dict[str, Any] = {}
    for sid, spec in doc["submanifolds"].items():
        require_keys(spec, [], ["zeros", "equations"], path=f"submanifolds.{sid}")
        sub = sub_from_equations(
            chart, spec.get("equations", []), zeros=spec.get("zeros", []), name=sid
        )
        if sub is None:
            raise DomainError(f"Submanifold '{sid}' has no point in the closed orthant")
        subs[sid] = sub
    return chart, subs
