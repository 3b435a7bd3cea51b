"""
Faces, Equivalence and Lifted Maps
----------------------------------
Boundary-face lattices of an atlas, a certificate-based comparison of two resolved
atlases, and lifting of ambient maps to chart-wise monomial-affine maps.
"""

from __future__ import annotations

import itertools
import logging
from dataclasses import dataclass, field
from typing import Any, Mapping

import graphviz
import networkx as nx
import sympy

from corner_calculus.atlas import Atlas, Chart
from corner_calculus.errors import ChartCoverageError, DomainError, UnsupportedComposition
from corner_calculus.orthant import BMapClass, MonomialAffineMap, classify_map, from_expressions

logger = logging.getLogger(__name__)

EQUIVALENT = "EQUIVALENT"
UNCERTIFIED = "UNCERTIFIED"
INEQUIVALENT = "INEQUIVALENT"


def face_lattice(atlas: Atlas) -> nx.DiGraph:
    """
    Nodes are label sets of boundary strata present in some chart; an edge A -> B means
    the face labelled A contains the corner labelled B (A ⊂ B), transitively reduced.
    """
    nodes: set[frozenset[str]] = set()
    for chart in atlas.charts:
        names = chart.coords.boundary
        for size in range(1, len(names) + 1):
            for face in itertools.combinations(range(len(names)), size):
                if not chart.excludes_stratum(face):
                    nodes.add(frozenset(names[i] for i in face))
    full = nx.DiGraph()
    full.add_nodes_from(nodes)
    for a, b in itertools.permutations(nodes, 2):
        if a < b:
            full.add_edge(a, b)
    reduced = nx.transitive_reduction(full)
    reduced.add_nodes_from((n, {"label": ",".join(sorted(n)), "codim": len(n)}) for n in nodes)
    return reduced


def lattice_to_json(g: nx.DiGraph) -> dict[str, Any]:
    def key(n: frozenset[str]) -> str:
        return ",".join(sorted(n))

    return {
        "nodes": sorted((key(n) for n in g.nodes), key=lambda s: (s.count(",") + 1, s)),
        "edges": sorted([key(a), key(b)] for a, b in g.edges),
    }


def to_dot(g: nx.DiGraph, name: str = "faces") -> str:
    dot = graphviz.Digraph(name=name)
    dot.attr(rankdir="TB")
    for n in sorted(g.nodes, key=lambda s: (len(s), sorted(s))):
        dot.node(",".join(sorted(n)), shape="box")
    for a, b in sorted(g.edges, key=lambda e: (sorted(e[0]), sorted(e[1]))):
        dot.edge(",".join(sorted(a)), ",".join(sorted(b)))
    return dot.source


def same_lattice(a: nx.DiGraph, b: nx.DiGraph) -> bool:
    return set(a.nodes) == set(b.nodes) and set(a.edges) == set(b.edges)


# ---------------------------------------------------------------------------
# Equivalence
# ---------------------------------------------------------------------------


@dataclass
class EquivalenceResult:
    status: str
    reasons: list[str] = field(default_factory=list)
    partners: dict[str, str] = field(default_factory=dict)

    @property
    def equivalent(self) -> bool:
        return self.status == EQUIVALENT

    def to_json(self) -> dict[str, Any]:
        return {"status": self.status, "reasons": list(self.reasons), "partners": dict(self.partners)}


def _is_deep(chart: Chart) -> bool:
    return chart.coords.b > 0 and not chart.excludes_stratum(range(chart.coords.b))


def _cross_transition(chart_a: Chart, chart_b: Chart, atlas_a: Atlas) -> dict[str, sympy.Expr]:
    return {
        name: sympy.cancel(chart_a.pull_back(e, atlas_a.ambient))
        for name, e in chart_b.from_ambient.items()
    }


def _can_be_positive(e: sympy.Expr) -> bool:
    """Not identically zero, and positive somewhere unless it is a constant."""
    e = sympy.simplify(e)
    if e == 0:
        return False
    return bool(e > 0) if not e.free_symbols else True


def is_local_b_diffeo(src: Chart, tgt: Chart, exprs: Mapping[str, sympy.Expr]) -> bool:
    """
    Near a generic point of the deepest corner of `src`, the transition is a
    b-diffeomorphism preserving labels: every boundary coordinate is the matching one
    times a unit, interior components are regular there, and the interior Jacobian is
    not identically singular.
    """
    if set(src.coords.boundary) != set(tgt.coords.boundary) or src.coords.m != tgt.coords.m:
        return False
    corner = {x: 0 for x in src.coords.boundary_symbols}
    for name in tgt.coords.boundary:
        unit = sympy.cancel(exprs[name] / sympy.Symbol(name, real=True))
        num, den = sympy.fraction(unit)
        n0, d0 = sympy.expand(num.xreplace(corner)), sympy.expand(den.xreplace(corner))
        if d0 == 0 or not _can_be_positive(n0 / d0):
            return False
    interior = [exprs[name] for name in tgt.coords.interior]
    for e in interior:
        den = sympy.fraction(sympy.cancel(e))[1]
        if sympy.expand(den.xreplace(corner)) == 0:
            return False
    if interior:
        jac = sympy.Matrix([[sympy.diff(e, y) for y in src.coords.interior_symbols] for e in interior])
        det = sympy.simplify(jac.xreplace(corner).det())
        if det == 0:
            return False
    return True


def check_equivalence(a: Atlas, b: Atlas) -> EquivalenceResult:
    """Compare two resolutions of the same ambient space."""
    if a.ambient != b.ambient:
        raise DomainError(f"Atlases {a.name} and {b.name} have different ambient charts")
    reasons: list[str] = []
    if a.registry != b.registry:
        diff = sorted(set(a.registry.items()) ^ set(b.registry.items()))
        reasons.append(f"Hypersurface registries differ: {diff}")
        return EquivalenceResult(INEQUIVALENT, reasons)
    if not same_lattice(face_lattice(a), face_lattice(b)):
        reasons.append("Boundary face lattices differ")
        return EquivalenceResult(INEQUIVALENT, reasons)
    partners: dict[str, str] = {}
    for left, right, tag in ((a, b, "a"), (b, a, "b")):
        for chart in filter(_is_deep, left.charts):
            match = next(
                (
                    other.label
                    for other in right.charts
                    if _is_deep(other)
                    and set(other.coords.boundary) == set(chart.coords.boundary)
                    and is_local_b_diffeo(chart, other, _cross_transition(chart, other, left))
                ),
                None,
            )
            if match is None:
                reasons.append(f"No certified partner for chart {tag}:{chart.label}")
            else:
                partners[f"{tag}:{chart.label}"] = match
    status = EQUIVALENT if not reasons else UNCERTIFIED
    logger.info("Equivalence %s vs %s: %s", a.name, b.name, status)
    return EquivalenceResult(status, reasons, partners)


# ---------------------------------------------------------------------------
# Lifted maps
# ---------------------------------------------------------------------------


@dataclass
class ChartMap:
    source: str
    target: str
    map: MonomialAffineMap
    cls: BMapClass


@dataclass
class LiftedMap:
    charts: list[ChartMap]
    uncovered: list[str]
    image_table: dict[str, set[str]]

    @property
    def is_b_map(self) -> bool:
        return all(c.cls.is_b_map for c in self.charts)

    @property
    def is_b_fibration(self) -> bool:
        return all(c.cls.b_fibration for c in self.charts)

    @property
    def is_simple(self) -> bool:
        return all(c.cls.simple for c in self.charts)

    def to_json(self) -> dict[str, Any]:
        return {
            "charts": [
                {"source": c.source, "target": c.target, "class": c.cls.to_json()} for c in self.charts
            ],
            "uncovered": list(self.uncovered),
            "image_table": {k: sorted(v) for k, v in sorted(self.image_table.items())},
        }


def _lands_in_exclusion(cs: Chart, ct: Chart, exprs: Mapping[str, sympy.Expr]) -> bool:
    """Some stratum of `cs` it keeps maps wholly into a zero set `ct` excludes."""
    if not ct.exclusions:
        return False
    at = {s: exprs[n] for s, n in zip(ct.coords.symbols, ct.coords.names)}
    pulled = [
        [sympy.fraction(sympy.cancel(p.xreplace(at)))[0] for p in system] for system in ct.exclusions
    ]
    xs = cs.coords.boundary_symbols
    for size in range(len(xs) + 1):
        for face in itertools.combinations(range(len(xs)), size):
            if cs.excludes_stratum(face):
                continue
            zero = {xs[i]: 0 for i in face}
            if any(all(sympy.expand(p.xreplace(zero)) == 0 for p in system) for system in pulled):
                return True
    return False


def _rank(cls: BMapClass) -> int:
    return 3 if cls.simple else 2 if cls.b_fibration else 1 if cls.is_b_map else 0


def lift_map(f: Mapping[str, sympy.Expr], src: Atlas, tgt: Atlas) -> LiftedMap:
    """
    `f` gives each target-ambient coordinate as an expression in source-ambient symbols.
    Each source chart is matched with a target chart in which the composite is
    monomial-affine with non-negative exponents and no kept source stratum lands in the
    target's exclusions; among those the best classified one wins, earliest first.
    """
    missing = set(tgt.ambient.names) - set(f)
    if missing:
        raise DomainError(f"Ambient map lacks components {sorted(missing)}")
    outer = {s: sympy.sympify(f[n]) for s, n in zip(tgt.ambient.symbols, tgt.ambient.names)}
    charts: list[ChartMap] = []
    uncovered: list[str] = []
    table: dict[str, set[str]] = {}
    for cs in src.charts:
        found: ChartMap | None = None
        for ct in tgt.charts:
            exprs = {
                name: sympy.cancel(cs.pull_back(e.xreplace(outer), src.ambient))
                for name, e in ct.from_ambient.items()
            }
            try:
                m = from_expressions(cs.coords, ct.coords, exprs, allow_negative=False)
            except UnsupportedComposition:
                continue
            if _lands_in_exclusion(cs, ct, exprs):
                continue
            candidate = ChartMap(cs.label, ct.label, m, classify_map(m, excluded=cs.excludes_stratum))
            if found is None or _rank(candidate.cls) > _rank(found.cls):
                found = candidate
            if found.cls.simple:
                break
        if found is None:
            if cs.exclusions:
                uncovered.append(cs.label)
                continue
            raise ChartCoverageError(f"No target chart contains the image of chart {cs.label}")
        charts.append(found)
        for k, label in enumerate(cs.coords.boundary):
            hit = table.setdefault(label, set())
            for tlabel, comp in zip(found.map.target.boundary, found.map.boundary):
                if comp is not None and comp.exponents[k] > 0:
                    hit.add(tlabel)
    if uncovered:
        logger.info("Lift left %d charts uncovered: %s", len(uncovered), uncovered)
    return LiftedMap(charts, uncovered, table)
