"""
Iterated Blow-up
----------------
Real blow-up of an atlas along an affine p-submanifold, lifting of the tracked
submanifolds, and iterated resolution along an ordered family of centres.

Near the centre C = {x_S = 0, u(x) = c} each chart is rewritten in normal coordinates
z = (x_S, u - c) and tangential coordinates v = w + T z, where T is chosen so that as many
tracked submanifolds through C as possible split into a z-part and a v-part. Each normal
coordinate then gives one projective chart (two when it is interior, one per sign):

    r = ±z_d,   Z_k = z_k / r,   v unchanged.

The projective charts cover the whole blown-up chart. A member missing C is carried into
each projective chart where its lift is affine and excluded from the others. The parent
chart survives as a remainder chart, with C excluded, only when the charts carrying such a
member miss part of it.
"""

from __future__ import annotations

import logging
from dataclasses import dataclass, field, replace
from fractions import Fraction
from typing import Any, Iterable, Sequence

import sympy

from corner_calculus.arrangement import (
    AffinePSub,
    adapted_section,
    intersect,
    is_p_clean,
    is_p_positioned,
    linear_row,
    normalize,
)
from corner_calculus.atlas import Atlas, Chart, front_face
from corner_calculus.errors import (
    CornerCalculusError,
    DomainError,
    LiftLeavesAffineClass,
    NotPPositioned,
    StepError,
    UnsupportedCenter,
)
from corner_calculus.linalg import (
    Inequality,
    Matrix,
    fm_feasible,
    in_row_space,
    row_space_intersection,
    rref,
    solve_affine,
)
from corner_calculus.orthant import OrthantChart, sym

logger = logging.getLogger(__name__)


def front_face_label(center_id: str) -> str:
    return f"ff[{center_id}]"


@dataclass
class _Frame:
    """Normal/tangential splitting of one chart around the centre."""

    zero_idx: list[int]
    pivots: list[int]
    z_names: list[str]
    z_boundary: list[bool]
    rest: list[int]
    temp: OrthantChart
    x_of_w: dict[str, sympy.Expr]
    z_of_x: list[sympy.Expr]


def _normal_frame(chart: Chart, center: AffinePSub, step: int, center_id: str) -> _Frame:
    coords = chart.coords
    n = coords.dim
    zero_idx = sorted(center.zeros)

    def never_zero(p: int) -> bool:
        units = [[Fraction(int(j == p)) for j in range(n)]]
        return (
            normalize(coords, center.zeros | {p}, list(center.rows) + units, list(center.rhs) + [Fraction(0)])
            is None
        )

    allowed = [i for i in range(n) if i not in center.zeros and (not coords.is_boundary(i) or never_zero(i))]
    order = allowed + [i for i in range(n) if i not in allowed]
    aug = [[row[j] for j in order] + [c] for row, c in zip(center.rows, center.rhs)]
    red, piv = rref(aug, n + 1) if aug else ([], ())
    if any(p >= len(allowed) for p in piv):
        raise NotPPositioned(center_id, chart.label)
    rows: list[tuple[list[Fraction], Fraction]] = []
    pivots: list[int] = []
    for red_row, p in zip(red, piv):
        full = [Fraction(0)] * n
        for j, idx in enumerate(order):
            full[idx] = red_row[j]
        rows.append((full, red_row[n]))
        pivots.append(order[p])

    u_names = [f"u{step}_{k + 1}" for k in range(len(rows))]
    z_names = [coords.names[i] for i in zero_idx] + u_names
    z_boundary = [True] * len(zero_idx) + [False] * len(rows)
    rest = [i for i in range(n) if i not in center.zeros and i not in pivots]
    temp = OrthantChart((), tuple(z_names) + tuple(coords.names[i] for i in rest))

    x_of_w: dict[str, sympy.Expr] = {}
    for i in zero_idx:
        x_of_w[coords.names[i]] = sym(coords.names[i])
    for i in rest:
        x_of_w[coords.names[i]] = sym(coords.names[i])
    for (full, c), p, name in zip(rows, pivots, u_names):
        x_of_w[coords.names[p]] = (
            sym(name)
            + _q(c)
            - sum((_q(full[j]) * sym(coords.names[j]) for j in rest), sympy.Integer(0))
        )
    xs = coords.symbols
    z_of_x = [xs[i] for i in zero_idx] + [
        sum((_q(a) * x for a, x in zip(full, xs)), sympy.Integer(0)) - _q(c) for full, c in rows
    ]
    return _Frame(zero_idx, pivots, z_names, z_boundary, rest, temp, x_of_w, z_of_x)


def _q(x: Fraction) -> sympy.Rational:
    return sympy.Rational(x.numerator, x.denominator)


def _affine_rows(exprs: Iterable[sympy.Expr], chart: OrthantChart) -> Matrix:
    out: Matrix = []
    for e in exprs:
        row, rhs = linear_row(e, chart)
        out.append(row + [-rhs])
    return out


def _row_expr(row: Sequence[Fraction], chart: OrthantChart) -> sympy.Expr:
    return sum((_q(a) * s for a, s in zip(row, chart.symbols)), sympy.Integer(0)) + _q(row[-1])


def _in_frame(sub: AffinePSub, chart: Chart, frame: _Frame) -> list[sympy.Expr]:
    subs = {s: frame.x_of_w[n] for s, n in zip(chart.coords.symbols, chart.coords.names)}
    return [sympy.expand(e.xreplace(subs)) for e in sub.equations()]


def _units(idx: Iterable[int], ncols: int) -> Matrix:
    return [[Fraction(int(j == i)) for j in range(ncols)] for i in idx]


def _classify(chart: Chart, sub: AffinePSub, center: AffinePSub) -> str:
    meet = intersect(sub, center)
    if meet is None or chart.excludes_sub(meet):
        return "disjoint"
    if center.contains(sub):
        return "inside"
    return "meets"


def _add_pulled_exclusions(child: Chart, systems: Iterable[Sequence[sympy.Expr]], x_child: dict[sympy.Symbol, sympy.Expr]) -> None:
    for system in systems:
        child.add_exclusion([e.xreplace(x_child) for e in system])


def _pull_disjoint(
    child: Chart, sub: AffinePSub, x_child: dict[sympy.Symbol, sympy.Expr]
) -> tuple[bool, AffinePSub | None]:
    """
    A member missing the centre, pulled back into a projective chart. Away from the centre
    the blow-down is a diffeomorphism, so the pulled-back zero set is the lift. Returns
    (affine, part); part is None when the lift misses the chart.
    """
    polys = [p for p in (sympy.expand(e.xreplace(x_child)) for e in sub.equations()) if p != 0]
    if not polys:
        return False, None
    basis = sympy.groebner(polys, *child.coords.symbols, order="lex").exprs
    if basis == [1]:
        return True, None
    if any(sympy.Poly(g, *child.coords.symbols).total_degree() > 1 for g in basis):
        return False, None
    rows, rhs = zip(*(linear_row(g, child.coords) for g in basis))
    part = normalize(child.coords, (), rows, rhs, sub.name)
    if part is None or child.excludes_sub(part):
        return True, None
    return True, part


def _covered(sub: AffinePSub, chart: Chart, frame: _Frame, handled: Sequence[tuple[int, int]]) -> bool:
    """The member lies in the union of the regions {σ z_d > 0} of the `handled` charts."""
    sol = solve_affine(sub.conormal(), sub.full_rhs(), sub.n)
    if sol is None:
        return True
    k = len(sol.directions)
    system = [
        Inequality(tuple(v[i] for v in sol.directions), sol.point[i], False)
        for i in range(chart.coords.b)
    ]
    for d, sign in handled:
        row, rhs = linear_row(frame.z_of_x[d], chart.coords)
        at_point = sum((a * p for a, p in zip(row, sol.point)), Fraction(0)) - rhs
        slope = tuple(sum((a * v[i] for i, a in enumerate(row)), Fraction(0)) for v in sol.directions)
        system.append(Inequality(tuple(-sign * s for s in slope), -sign * at_point, False))
    return not fm_feasible(system, k)


def _blow_up_chart(
    atlas: Atlas, chart: Chart, center_id: str, center: AffinePSub, step: int
) -> tuple[list[Chart], dict[str, dict[str, AffinePSub]]]:
    coords = chart.coords
    subs = atlas.lifted.get(chart.label, {})
    if not is_p_positioned(center, excluded=chart.excludes_sub):
        raise NotPPositioned(center_id, chart.label)
    if center.codim == 1 and center.zeros:
        logger.info("Centre %s is a boundary hypersurface in chart %s; blow-up is the identity", center_id, chart.label)
        same = replace(chart, exclusions=list(chart.exclusions))
        return [same], {chart.label: {k: v for k, v in subs.items() if k != center_id}}

    frame = _normal_frame(chart, center, step, center_id)
    temp = frame.temp
    nz = len(frame.z_names)
    ncols = temp.dim
    kinds = {sid: _classify(chart, p, center) for sid, p in subs.items() if sid != center_id}
    frame_rows = {sid: _affine_rows(_in_frame(subs[sid], chart, frame), temp) for sid in kinds if kinds[sid] != "disjoint"}

    meeting = [sid for sid, k in kinds.items() if k == "meets"]
    frozen = [nz + pos for pos, i in enumerate(frame.rest) if coords.is_boundary(i)]
    section = adapted_section(
        [[r[:ncols] for r in frame_rows[sid]] for sid in meeting],
        list(range(nz)),
        list(range(nz, ncols)),
        frozen=frozen,
        greedy=True,
    )
    tmat, accepted = section if section is not None else ({}, [])
    if len(accepted) < len(meeting):
        logger.debug(
            "Centre %s in chart %s: no common splitting for %s",
            center_id,
            chart.label,
            [sid for pos, sid in enumerate(meeting) if pos not in accepted],
        )
    z_syms = [temp.symbols[k] for k in range(nz)]
    shift = {
        temp.symbols[c]: temp.symbols[c]
        - sum((_q(tmat.get((c, k), Fraction(0))) * z_syms[k] for k in range(nz)), sympy.Integer(0))
        for c in range(nz, ncols)
    }
    shifted_rows = {
        sid: _affine_rows((sympy.expand(_row_expr(r, temp).xreplace(shift)) for r in rows), temp)
        for sid, rows in frame_rows.items()
    }
    x_of_zv = {name: sympy.expand(e.xreplace(shift)) for name, e in frame.x_of_w.items()}
    v_of_x = [
        coords.symbols[i]
        + sum(
            (_q(tmat.get((nz + pos, k), Fraction(0))) * frame.z_of_x[k] for k in range(nz)),
            sympy.Integer(0),
        )
        for pos, i in enumerate(frame.rest)
    ]

    ff = front_face_label(center_id)
    to_parent_ambient = {s: chart.from_ambient[n] for s, n in zip(coords.symbols, coords.names)}
    children: list[Chart] = []
    lifted: dict[str, dict[str, AffinePSub]] = {}
    disjoint = [sid for sid, k in kinds.items() if k == "disjoint"]
    handled: dict[str, list[tuple[int, int]]] = {sid: [] for sid in disjoint}
    tangled: set[str] = set()
    for d in range(nz):
        for sign in (1,) if frame.z_boundary[d] else (1, -1):
            boundary = [ff]
            interior: list[str] = []
            z_child: dict[sympy.Symbol, sympy.Expr] = {}
            r = sym(ff)
            for k in range(nz):
                if k == d:
                    z_child[z_syms[k]] = sign * r
                    continue
                if frame.z_boundary[k]:
                    name = frame.z_names[k]
                    boundary.append(name)
                else:
                    name = f"U{step}_{k + 1}"
                    interior.append(name)
                z_child[z_syms[k]] = r * sym(name)
            for i in frame.rest:
                (boundary if coords.is_boundary(i) else interior).append(coords.names[i])
            child_coords = OrthantChart(tuple(boundary), tuple(interior))
            x_child = {
                s: sympy.expand(x_of_zv[n].xreplace(z_child))
                for s, n in zip(coords.symbols, coords.names)
            }
            to_amb = {
                name: sympy.cancel(e.xreplace(x_child)) for name, e in chart.to_ambient.items()
            }
            rr = sign * frame.z_of_x[d]
            in_parent: dict[str, sympy.Expr] = {ff: rr}
            for k in range(nz):
                if k != d:
                    key = frame.z_names[k] if frame.z_boundary[k] else f"U{step}_{k + 1}"
                    in_parent[key] = frame.z_of_x[k] / rr
            for pos, i in enumerate(frame.rest):
                in_parent[coords.names[i]] = v_of_x[pos]
            from_amb = {
                name: sympy.cancel(e.xreplace(to_parent_ambient)) for name, e in in_parent.items()
            }
            tag = "" if frame.z_boundary[d] else ("+" if sign > 0 else "-")
            child = Chart(f"{chart.label}.{center_id}:{frame.z_names[d]}{tag}", child_coords, to_amb, from_amb, parent=chart.label)
            _add_pulled_exclusions(child, chart.exclusions, x_child)
            carried: dict[str, AffinePSub] = {}
            for sid in disjoint:
                affine, part = _pull_disjoint(child, subs[sid], x_child)
                if not affine:
                    _add_pulled_exclusions(child, [subs[sid].equations()], x_child)
                    tangled.add(sid)
                    continue
                handled[sid].append((d, sign))
                if part is not None:
                    carried[sid] = part
            near = _lift_into(child, kinds, shifted_rows, temp, nz, d, z_syms, z_child, r, center_id)
            merged = {**near, **carried}
            lifted[child.label] = {sid: merged[sid] for sid in kinds if sid in merged}
            children.append(child)

    needs_remainder = [sid for sid in sorted(tangled) if not _covered(subs[sid], chart, frame, handled[sid])]
    if not needs_remainder:
        logger.debug("Blew up %s in chart %s: %d projective charts", center_id, chart.label, len(children))
        return children, lifted
    # Members only partly carried by the projective charts live on in the remainder.
    remainder = replace(chart, label=f"{chart.label}.r", exclusions=list(chart.exclusions), parent=chart.label)
    remainder.add_exclusion(center.equations())
    lifted[remainder.label] = {
        sid: p for sid, p in subs.items() if sid != center_id and kinds[sid] != "inside"
    }
    logger.debug(
        "Blew up %s in chart %s: %d projective charts plus remainder for %s",
        center_id,
        chart.label,
        len(children),
        needs_remainder,
    )
    return children + [remainder], lifted


def _lift_into(
    child: Chart,
    kinds: dict[str, str],
    rows: dict[str, Matrix],
    temp: OrthantChart,
    nz: int,
    d: int,
    z_syms: list[sympy.Symbol],
    z_child: dict[sympy.Symbol, sympy.Expr],
    r: sympy.Symbol,
    center_id: str,
) -> dict[str, AffinePSub]:
    """
    Lift every member meeting the chart. For a member through the centre, functions of z
    alone are divided by r; every other function a·z + b·v - c must have a ≡ λ e_d modulo
    those, and then reads λ z_d + b·v - c on the lift.
    """
    ncols = temp.dim
    out: dict[str, AffinePSub] = {}
    zero_z = {z: 0 for z in z_syms}
    e_d = _units([d], nz)[0]
    for sid, kind in kinds.items():
        if kind == "disjoint":
            continue
        m = rows[sid]
        eqs: list[sympy.Expr]
        if kind == "inside":
            eqs = [r] + [
                e for e in (sympy.expand(_row_expr(row, temp).xreplace(zero_z)) for row in m) if e != 0
            ]
        else:
            fz = row_space_intersection(m, _units(range(nz), ncols + 1), ncols + 1)
            eqs = [sympy.cancel(_row_expr(row, temp).xreplace(z_child) / r) for row in fz]
            if _empty_in(child, eqs):
                continue
            gens = [row[:nz] for row in fz] + [e_d]
            transposed = [[g[i] for g in gens] for i in range(nz)]
            basis = list(fz)
            for row in rref(m, ncols + 1)[0]:
                if in_row_space(basis, row, ncols + 1):
                    continue
                basis.append(row)
                sol = solve_affine(transposed, row[:nz], len(gens))
                if sol is None:
                    raise LiftLeavesAffineClass(
                        f"Lift of '{sid}' through centre '{center_id}' is not affine in chart {child.label}"
                    )
                tangential = [Fraction(0)] * nz + list(row[nz:])
                eqs.append(_q(sol.point[-1]) * z_child[z_syms[d]] + _row_expr(tangential, temp))
        try:
            rows_c, rhs_c = zip(*(linear_row(e, child.coords) for e in eqs))
        except CornerCalculusError as exc:
            raise LiftLeavesAffineClass(f"Lift of '{sid}' in chart {child.label}: {exc}") from exc
        sub = normalize(child.coords, (), rows_c, rhs_c, sid)
        if sub is not None and not child.excludes_sub(sub):
            out[sid] = sub
    return out


def _empty_in(child: Chart, eqs: Sequence[sympy.Expr]) -> bool:
    if not eqs:
        return False
    try:
        rows_c, rhs_c = zip(*(linear_row(e, child.coords) for e in eqs))
    except CornerCalculusError:
        return False
    return normalize(child.coords, (), rows_c, rhs_c) is None


def blow_up(atlas: Atlas, center_id: str) -> Atlas:
    """Blow up every chart carrying the centre; others are copied unchanged."""
    if center_id not in atlas.sub_ids():
        raise UnsupportedCenter(f"Centre '{center_id}' is not carried by atlas {atlas.name}")
    step = len(atlas.centers) + 1
    charts: list[Chart] = []
    lifted: dict[str, dict[str, AffinePSub]] = {}
    for chart in atlas.charts:
        subs = atlas.lifted.get(chart.label, {})
        center = subs.get(center_id)
        if center is None:
            charts.append(replace(chart, exclusions=list(chart.exclusions)))
            lifted[chart.label] = dict(subs)
            continue
        new_charts, new_lifted = _blow_up_chart(atlas, chart, center_id, center, step)
        charts.extend(new_charts)
        lifted.update(new_lifted)
    registry = dict(atlas.registry)
    if any(front_face_label(center_id) in c.coords.boundary for c in charts):
        registry[front_face_label(center_id)] = front_face(center_id)
    logger.info("Blow-up of %s: %d -> %d charts", center_id, len(atlas.charts), len(charts))
    return Atlas(atlas.name, atlas.ambient, charts, lifted, registry, atlas.centers + [center_id])


def lift_sub(atlas: Atlas, sub_id: str, center_id: str) -> dict[str, AffinePSub]:
    """Parts of the lift of `sub_id` to [atlas; center_id], keyed by chart label."""
    if sub_id not in atlas.sub_ids():
        raise DomainError(f"Submanifold '{sub_id}' is not carried by atlas {atlas.name}")
    blown = blow_up(atlas, center_id)
    return {c.label: blown.lifted[c.label][sub_id] for c in blown.charts_with(sub_id)}


@dataclass(frozen=True)
class BlowupStep:
    center: str
    charts: int
    remaining_p_clean: bool

    def to_json(self) -> dict[str, Any]:
        return {"center": self.center, "charts": self.charts, "remaining_p_clean": self.remaining_p_clean}


@dataclass
class BlowupSequence:
    initial: Atlas
    final: Atlas
    order: list[str]
    steps: list[BlowupStep] = field(default_factory=list)

    @property
    def all_clean(self) -> bool:
        return all(s.remaining_p_clean for s in self.steps)

    def to_json(self) -> dict[str, Any]:
        return {
            "order": list(self.order),
            "steps": [s.to_json() for s in self.steps],
            "registry": dict(sorted(self.final.registry.items())),
            "charts": len(self.final.charts),
        }


def remaining_p_clean(atlas: Atlas, ids: Sequence[str]) -> bool:
    """Lifts of `ids` form a p-clean family in every chart."""
    for chart in atlas.charts:
        subs = atlas.lifted.get(chart.label, {})
        family = [subs[i] for i in ids if i in subs]
        if len(family) > 1 and not is_p_clean(family, excluded=chart.excludes_sub):
            return False
    return True


def resolve(atlas: Atlas, order: Sequence[str], tracked: Sequence[str] = ()) -> BlowupSequence:
    """Blow up the centres in order; StepError names the first failing step."""
    current = atlas
    steps: list[BlowupStep] = []
    for i, center in enumerate(order):
        try:
            current = blow_up(current, center)
        except (NotPPositioned, LiftLeavesAffineClass, UnsupportedCenter) as exc:
            raise StepError(i, center, str(exc)) from exc
        later = [c for c in order[i + 1 :]] + [t for t in tracked if t not in order]
        steps.append(BlowupStep(center, len(current.charts), remaining_p_clean(current, later)))
    return BlowupSequence(atlas, current, list(order), steps)
