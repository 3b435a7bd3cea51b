"""
Atlases
-------
Finite atlases of orthant charts over an ambient coordinate space. Each chart records how
its coordinates relate to the ambient ones (both directions, as rational expressions), the
zero sets it must omit (exclusions), and the lifted submanifolds it carries.

Transition maps are composites from_ambient(B) ∘ to_ambient(A), so the cocycle identity
holds by construction once expressions are cancelled.
"""

from __future__ import annotations

import itertools
import logging
from dataclasses import dataclass, field
from typing import Any, Iterable, Mapping, Sequence

import sympy

from corner_calculus.arrangement import AffinePSub, linear_row, normalize
from corner_calculus.errors import DomainError
from corner_calculus.orthant import (
    MonomialAffineMap,
    OrthantChart,
    from_expressions,
    sym,
)

logger = logging.getLogger(__name__)

ORIGINAL = "Original"

Exclusion = tuple[sympy.Expr, ...]


def front_face(center_id: str) -> str:
    return f"FrontFace({center_id})"


@dataclass
class Chart:
    label: str
    coords: OrthantChart
    to_ambient: dict[str, sympy.Expr]
    from_ambient: dict[str, sympy.Expr]
    exclusions: list[Exclusion] = field(default_factory=list)
    parent: str = ""

    def pull_back(self, expr: sympy.Expr, ambient: OrthantChart) -> sympy.Expr:
        """An ambient expression written in this chart's coordinates."""
        subs = {s: self.to_ambient[n] for s, n in zip(ambient.symbols, ambient.names)}
        return sympy.cancel(sympy.sympify(expr).xreplace(subs))

    def add_exclusion(self, system: Iterable[sympy.Expr]) -> None:
        polys = tuple(
            p for p in (sympy.expand(sympy.fraction(sympy.cancel(e))[0]) for e in system) if p != 0
        )
        if not polys:
            raise DomainError(f"Exclusion in chart {self.label} would remove the whole chart")
        if sympy.groebner(polys, *self.coords.symbols).exprs == [1]:
            return
        if polys not in self.exclusions:
            self.exclusions.append(polys)

    def excludes_sub(self, sub: AffinePSub) -> bool:
        """The sub lies entirely inside one of the excluded zero sets."""
        if not self.exclusions:
            return False
        coords, _ = sub.parametrize()
        at = dict(zip(self.coords.symbols, coords))
        return any(
            all(sympy.expand(p.xreplace(at)) == 0 for p in system) for system in self.exclusions
        )

    def excludes_stratum(self, face: Iterable[int]) -> bool:
        at = {self.coords.symbols[i]: 0 for i in face}
        return any(
            all(sympy.expand(p.xreplace(at)) == 0 for p in system) for system in self.exclusions
        )

    def to_json(self) -> dict[str, Any]:
        return {
            "label": self.label,
            "coordinates": self.coords.to_json(),
            "to_ambient": {k: str(v) for k, v in self.to_ambient.items()},
            "exclusions": [[str(p) for p in system] for system in self.exclusions],
        }


@dataclass
class Atlas:
    name: str
    ambient: OrthantChart
    charts: list[Chart]
    lifted: dict[str, dict[str, AffinePSub]] = field(default_factory=dict)
    registry: dict[str, str] = field(default_factory=dict)
    centers: list[str] = field(default_factory=list)

    def chart(self, label: str) -> Chart:
        for c in self.charts:
            if c.label == label:
                return c
        raise DomainError(f"No chart '{label}' in atlas {self.name}")

    def hypersurfaces(self) -> list[str]:
        return sorted(self.registry)

    def sub_ids(self) -> list[str]:
        seen: dict[str, None] = {}
        for c in self.charts:
            for sid in self.lifted.get(c.label, {}):
                seen.setdefault(sid)
        return list(seen)

    def charts_with(self, sub_id: str) -> list[Chart]:
        return [c for c in self.charts if sub_id in self.lifted.get(c.label, {})]

    def to_json(self) -> dict[str, Any]:
        return {
            "name": self.name,
            "ambient": self.ambient.to_json(),
            "centers": list(self.centers),
            "registry": dict(sorted(self.registry.items())),
            "charts": [
                {
                    **c.to_json(),
                    "submanifolds": {
                        sid: sub.to_json() for sid, sub in self.lifted.get(c.label, {}).items()
                    },
                }
                for c in self.charts
            ],
        }


def _identity_maps(chart: OrthantChart) -> dict[str, sympy.Expr]:
    return {n: s for n, s in zip(chart.names, chart.symbols)}


def sub_in_chart(
    chart: Chart, ambient: OrthantChart, equations: Sequence[sympy.Expr], name: str = ""
) -> AffinePSub | None:
    """Pull ambient equations into a chart; None when absent there."""
    rows, rhs = [], []
    zeros: list[int] = []
    for eq in equations:
        local = sympy.expand(sympy.fraction(chart.pull_back(eq, ambient))[0])
        if local in chart.coords.boundary_symbols:
            zeros.append(chart.coords.index(local.name))
            continue
        r, c = linear_row(local, chart.coords)
        rows.append(r)
        rhs.append(c)
    sub = normalize(chart.coords, zeros, rows, rhs, name)
    if sub is None or chart.excludes_sub(sub):
        return None
    return sub


def orthant_atlas(
    ambient: OrthantChart, subs: Mapping[str, AffinePSub] | None = None, name: str = "orthant"
) -> Atlas:
    """A single chart equal to the ambient orthant."""
    ident = _identity_maps(ambient)
    root = Chart("0", ambient, dict(ident), dict(ident))
    lifted = {"0": {sid: s.with_name(sid) for sid, s in (subs or {}).items()}}
    for s in lifted["0"].values():
        if s.chart != ambient:
            raise DomainError(f"Sub {s.name} is not in the ambient chart {ambient}")
    registry = {label: ORIGINAL for label in ambient.boundary}
    return Atlas(name, ambient, [root], lifted, registry)


def far_end(name: str) -> str:
    return f"{name}=1"


def interval_atlas(
    ambient: OrthantChart,
    subs: Mapping[str, AffinePSub] | None = None,
    *,
    ends: Sequence[str],
    name: str = "interval",
) -> Atlas:
    """
    The ambient orthant with each boundary coordinate in `ends` cut down to [0, 1]. One
    chart per choice of endpoint: near 0 the coordinate is kept, near 1 it is replaced by
    1 - c under the label "c=1". The other endpoint is excluded in every chart.
    """
    unknown = [e for e in ends if e not in ambient.boundary]
    if unknown:
        raise DomainError(f"Interval coordinates {unknown} are not boundary coordinates of {ambient}")
    charts: list[Chart] = []
    for flips in itertools.product((False, True), repeat=len(ends)):
        far = {e for e, flip in zip(ends, flips) if flip}
        coords = OrthantChart(
            tuple(far_end(n) if n in far else n for n in ambient.boundary), ambient.interior
        )
        to_amb: dict[str, sympy.Expr] = {}
        from_amb: dict[str, sympy.Expr] = {}
        for n, local in zip(ambient.names, coords.symbols):
            to_amb[n] = 1 - local if n in far else local
            from_amb[local.name] = 1 - sym(n) if n in far else sym(n)
        label = ",".join(far_end(e) for e in ends if e in far) or "0"
        chart = Chart(label, coords, to_amb, from_amb)
        for e in ends:
            chart.add_exclusion([sym(far_end(e) if e in far else e) - 1])
        charts.append(chart)
    atlas = Atlas(name, ambient, charts)
    atlas.registry = {label: ORIGINAL for label in ambient.boundary}
    atlas.registry.update({far_end(e): ORIGINAL for e in ends})
    for chart in charts:
        atlas.lifted[chart.label] = {}
        for sid, s in (subs or {}).items():
            if s.chart != ambient:
                raise DomainError(f"Sub {sid} is not in the ambient chart {ambient}")
            part = sub_in_chart(chart, ambient, s.equations(), sid)
            if part is not None:
                atlas.lifted[chart.label][sid] = part
    return atlas


def box_label(i: int, sign: int) -> str:
    return f"s{i}={'+' if sign > 0 else '-'}1"


def box_atlas(
    k: int,
    subs: Mapping[str, Sequence[sympy.Expr]] | None = None,
    *,
    extra_interior: Sequence[str] = (),
    name: str = "box",
) -> Atlas:
    """
    [-1, 1]^k × ℝ^e over ambient coordinates s1..sk (plus `extra_interior`). One chart per
    vertex with t_i = 1 - σ_i s_i; the far face t_i = 2 is excluded.
    """
    ambient = OrthantChart((), tuple(f"s{i}" for i in range(1, k + 1)) + tuple(extra_interior))
    charts: list[Chart] = []
    for signs in itertools.product((1, -1), repeat=k):
        boundary = tuple(box_label(i + 1, sg) for i, sg in enumerate(signs))
        coords = OrthantChart(boundary, tuple(extra_interior))
        to_amb: dict[str, sympy.Expr] = {}
        from_amb: dict[str, sympy.Expr] = {}
        for i, sg in enumerate(signs):
            s, t = sym(f"s{i + 1}"), coords.symbols[i]
            to_amb[s.name] = sg * (1 - t)
            from_amb[t.name] = 1 - sg * s
        for n in extra_interior:
            to_amb[n] = sym(n)
            from_amb[n] = sym(n)
        label = "".join("+" if sg > 0 else "-" for sg in signs)
        chart = Chart(label, coords, to_amb, from_amb)
        for t in coords.boundary_symbols:
            chart.add_exclusion([t - 2])
        charts.append(chart)
    atlas = Atlas(name, ambient, charts)
    atlas.registry = {box_label(i, sg): ORIGINAL for i in range(1, k + 1) for sg in (1, -1)}
    for sid, eqs in (subs or {}).items():
        for chart in charts:
            sub = sub_in_chart(chart, ambient, eqs, sid)
            if sub is not None:
                atlas.lifted.setdefault(chart.label, {})[sid] = sub
    for chart in charts:
        atlas.lifted.setdefault(chart.label, {})
    return atlas


def radial_atlas(m: int) -> Atlas:
    """
    Radial compactification of ℝ^m: the interior chart plus, for each i and sign σ, the
    chart ρ = 1/(σ y_i), Y_j = y_j/(σ y_i). The sphere at infinity is one hypersurface
    ("inf") for m >= 2 and two points ("inf+", "inf-") for m = 1.

    Transitions are rational but not monomial-affine: two charts overlap only where a
    ratio Y_j or a coordinate y_i is non-zero, and ρ' = ρ / Y_j there. transition_map
    raises UnsupportedComposition for them; transition and cocycle_holds apply.
    """
    if m < 1:
        raise DomainError("radial_atlas needs m >= 1")
    ambient = OrthantChart((), tuple(f"y{i}" for i in range(1, m + 1)))
    ident = _identity_maps(ambient)
    charts = [Chart("interior", ambient, dict(ident), dict(ident))]
    registry: dict[str, str] = {}
    for i in range(1, m + 1):
        for sg in (1, -1):
            face = "inf" if m >= 2 else ("inf+" if sg > 0 else "inf-")
            registry[face] = ORIGINAL
            tag = f"{i}{'+' if sg > 0 else '-'}"
            others = [j for j in range(1, m + 1) if j != i]
            coords = OrthantChart((face,), tuple(f"Y{tag}_{j}" for j in others))
            rho = coords.symbols[0]
            yi = sym(f"y{i}")
            to_amb: dict[str, sympy.Expr] = {yi.name: sg / rho}
            from_amb: dict[str, sympy.Expr] = {rho.name: 1 / (sg * yi)}
            for j, big in zip(others, coords.interior_symbols):
                to_amb[f"y{j}"] = big / rho
                from_amb[big.name] = sym(f"y{j}") / (sg * yi)
            charts.append(Chart(f"inf{tag}", coords, to_amb, from_amb))
    return Atlas(f"radial{m}", ambient, charts, {c.label: {} for c in charts}, registry)


def transition(atlas: Atlas, a: str, b: str) -> dict[str, sympy.Expr]:
    """Coordinates of chart b as rational functions of chart a's coordinates."""
    ca, cb = atlas.chart(a), atlas.chart(b)
    return {
        name: sympy.cancel(ca.pull_back(expr, atlas.ambient))
        for name, expr in cb.from_ambient.items()
    }


def transition_map(atlas: Atlas, a: str, b: str) -> MonomialAffineMap:
    """The transition as a monomial-affine map; raises UnsupportedComposition otherwise."""
    ca, cb = atlas.chart(a), atlas.chart(b)
    return from_expressions(ca.coords, cb.coords, transition(atlas, a, b))


def cocycle_holds(atlas: Atlas, a: str, b: str, c: str) -> bool:
    """φ_bc ∘ φ_ab = φ_ac as rational functions."""
    ab = transition(atlas, a, b)
    bc = transition(atlas, b, c)
    ac = transition(atlas, a, c)
    cb = atlas.chart(b).coords
    at = {s: ab[n] for s, n in zip(cb.symbols, cb.names)}
    return all(
        sympy.cancel(bc[name].xreplace(at) - ac[name]) == 0 for name in ac
    )
