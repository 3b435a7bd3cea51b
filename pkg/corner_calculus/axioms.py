"""
Generalized Product Checks
--------------------------
Axiom verification for generalized product models, boundary products, multidiagonal
identities, and the combinatorics of simple support under lifted b-fibrations.

Checks never raise for a failed property; they record it in the returned report.
"""

from __future__ import annotations

import itertools
import logging
from dataclasses import dataclass, field
from functools import partial
from typing import Any, Iterable

import networkx as nx
import sympy

from corner_calculus.arrangement import (
    AffinePSub,
    diagonal_name,
    intersect,
    is_p_positioned,
    relation,
    sub_from_equations,
)
from corner_calculus.atlas import Atlas, Chart
from corner_calculus.blowup import blow_up, front_face_label
from corner_calculus.errors import CornerCalculusError, DomainError, ModelError
from corner_calculus.faces import LiftedMap, face_lattice, lift_map
from corner_calculus.finsetcat import (
    FinSetMap,
    Generator,
    Partition,
    all_maps,
    alternative_decompose,
    generator_decompose,
    non_discrete_partitions,
)
from corner_calculus.genprod import (
    FACE,
    GeneralizedProductModel,
    compose_exprs,
    projection,
    structure_map,
)
from corner_calculus.orthant import OrthantChart, sym

logger = logging.getLogger(__name__)


@dataclass
class AxiomReport:
    dimension_law: bool = True
    relations: dict[str, bool] = field(default_factory=dict)
    injection_maps: dict[str, str] = field(default_factory=dict)
    surjection_maps: dict[str, bool] = field(default_factory=dict)
    symmetry: bool = True
    failures: list[str] = field(default_factory=list)

    @property
    def passed(self) -> bool:
        return (
            self.dimension_law
            and all(self.relations.values())
            and all(v == "SimpleBFibration" for v in self.injection_maps.values())
            and all(self.surjection_maps.values())
            and self.symmetry
        )

    def to_json(self) -> dict[str, Any]:
        return {
            "passed": self.passed,
            "dimension_law": self.dimension_law,
            "relations": dict(sorted(self.relations.items())),
            "injection_maps": dict(sorted(self.injection_maps.items())),
            "surjection_maps": dict(sorted(self.surjection_maps.items())),
            "symmetry": self.symmetry,
            "failures": list(self.failures),
        }


def _same(a: dict[str, sympy.Expr], b: dict[str, sympy.Expr]) -> bool:
    return a.keys() == b.keys() and all(sympy.cancel(a[k] - b[k]) == 0 for k in a)


def word_structure_map(model: GeneralizedProductModel, word: list[Generator], n: int) -> dict[str, sympy.Expr]:
    """S of a left-to-right word: S_{g1} ∘ S_{g2} ∘ ... by contravariance."""
    out: dict[str, sympy.Expr] | None = None
    for g in word:
        step = structure_map(model, g.as_map())
        out = step if out is None else compose_exprs(out, step)
    if out is None:
        return structure_map(model, FinSetMap.identity(n))
    return out


def _gen(model: GeneralizedProductModel, name: str) -> dict[str, sympy.Expr]:
    return structure_map(model, model.generators[name])


def _relations(model: GeneralizedProductModel, report: AxiomReport) -> None:
    top = min(model.K, 3)
    for n in range(1, top + 1):
        for m in range(1, top + 1):
            for f in all_maps(n, m):
                direct = structure_map(model, f)
                ok = _same(direct, word_structure_map(model, generator_decompose(f), n)) and _same(
                    direct, word_structure_map(model, alternative_decompose(f), n)
                )
                report.relations[f"S{list(f.values)}->J({m})"] = ok
    if model.K >= 2:
        report.relations["Pi_L D = id"] = _same(
            compose_exprs(_gen(model, "Pi_L"), _gen(model, "D")),
            structure_map(model, FinSetMap.identity(1)),
        )
        report.relations["R R = id"] = _same(
            compose_exprs(_gen(model, "R"), _gen(model, "R")),
            structure_map(model, FinSetMap.identity(2)),
        )
    if model.K >= 3:
        report.relations["Pi_R Pi_S = Pi_L Pi_F"] = _same(
            compose_exprs(_gen(model, "Pi_R"), _gen(model, "Pi_S")),
            compose_exprs(_gen(model, "Pi_L"), _gen(model, "Pi_F")),
        )
        for j in range(2, model.K + 1):
            vals = list(range(1, model.K + 1))
            vals[0], vals[j - 1] = j, 1
            r1j = structure_map(model, FinSetMap(tuple(vals), model.K))
            p1j = structure_map(model, FinSetMap((1, j), model.K))
            report.relations[f"Pi_1{j} R_1{j} = R Pi_1{j}"] = _same(
                compose_exprs(p1j, r1j), compose_exprs(_gen(model, "R"), p1j)
            )


def _class_name(lifted: LiftedMap) -> str:
    if not lifted.charts:
        return "Uncovered"
    if lifted.is_simple:
        return "SimpleBFibration"
    if lifted.is_b_fibration:
        return "BFibration"
    return "BMap" if lifted.is_b_map else "NotBMap"


def lift_generator(model: GeneralizedProductModel, f: FinSetMap) -> LiftedMap:
    """Lift S_f between the resolved spaces M[m] -> M[n]."""
    return lift_map(
        structure_map(model, f), model.spaces[f.codomain_size], model.spaces[f.domain_size]
    )


def _injections(model: GeneralizedProductModel, report: AxiomReport) -> None:
    named = {f"Pi_{k}": projection(k) for k in range(2, model.K + 1)}
    for name in ("Pi_L", "Pi_R", "Pi_S", "Pi_F", "Pi_C"):
        f = model.generators[name]
        if f.codomain_size <= model.K:
            named[name] = f
    for name, f in named.items():
        try:
            lifted = lift_generator(model, f)
        except CornerCalculusError as exc:
            report.injection_maps[name] = "NotBMap"
            report.failures.append(f"{name}: {exc}")
            continue
        cls = _class_name(lifted)
        report.injection_maps[name] = cls
        if cls != "SimpleBFibration":
            bad = [f"{c.source}->{c.target} ({c.cls.kind})" for c in lifted.charts if not c.cls.simple]
            report.failures.append(f"{name} lifts to {cls}; not simple on {bad[:3]}")


def _unpositioned(model: GeneralizedProductModel, k: int, sid: str) -> list[str]:
    """Charts of M[k] where the lift of `sid` is not p-positioned."""
    atlas = model.spaces[k]
    out = []
    for chart in atlas.charts:
        sub = atlas.lifted.get(chart.label, {}).get(sid)
        if sub is not None and not is_p_positioned(sub, excluded=chart.excludes_sub):
            out.append(chart.label)
    return out


def _surjections(model: GeneralizedProductModel, report: AxiomReport) -> None:
    if model.K >= 2:
        d = diagonal_name(Partition.indiscrete(2))
        bad = _unpositioned(model, 2, d)
        section = report.relations.get("Pi_L D = id", False)
        report.surjection_maps["D"] = not bad and section
        if bad:
            report.failures.append(f"D: lifted {d} is not p-positioned in {bad[:3]}")
    if model.K >= 3:
        d12 = diagonal_name(Partition.of(3, [[1, 2]]))
        bad = _unpositioned(model, 3, d12)
        report.surjection_maps["D_12"] = not bad
        if bad:
            report.failures.append(f"D_12: lifted {d12} is not p-positioned in {bad[:3]}")


def transform_sub(
    model: GeneralizedProductModel, k: int, sub: AffinePSub, f: FinSetMap
) -> AffinePSub | None:
    """
    Preimage of an ambient sub of M[k] under the automorphism S_f, f a bijection of J(k).
    On boundary products S_f may be rational; equations are cleared of their denominators.
    """
    at = {sym(n): e for n, e in structure_map(model, f).items()}
    eqs = [sympy.expand(sympy.fraction(sympy.cancel(e.xreplace(at)))[0]) for e in sub.equations()]
    return sub_from_equations(model.ambient(k), eqs, name=sub.name)


def _symmetry(model: GeneralizedProductModel, report: AxiomReport) -> None:
    for k in range(2, model.K + 1):
        for i in range(1, k):
            sigma = Generator("sigma", k, i).as_map()
            for family in (model.centers.get(k, {}), model.diagonals.get(k, {})):
                subs = set(family.values())
                moved = {transform_sub(model, k, s, sigma) for s in subs}
                if moved != subs:
                    report.symmetry = False
                    report.failures.append(f"sigma{i} does not permute the family at k={k}")


def check_axioms(model: GeneralizedProductModel) -> AxiomReport:
    report = AxiomReport()
    for k, atlas in model.spaces.items():
        if atlas.ambient.dim != model.dim(k):
            report.dimension_law = False
            report.failures.append(f"dim M[{k}] = {atlas.ambient.dim} != {model.dim(k)}")
    _relations(model, report)
    _injections(model, report)
    _surjections(model, report)
    _symmetry(model, report)
    report.failures.extend(name for name, ok in report.relations.items() if not ok)
    logger.info("Axioms for %s: %s", model.kind, "pass" if report.passed else "fail")
    return report


# ---------------------------------------------------------------------------
# Boundary products
# ---------------------------------------------------------------------------


@dataclass
class BoundaryProduct:
    hypersurface: str
    faces: dict[int, str]
    fibre_lattices: dict[int, nx.DiGraph]
    model: GeneralizedProductModel

    @property
    def dims(self) -> dict[int, int]:
        return {k: atlas.ambient.dim for k, atlas in sorted(self.model.spaces.items())}

    def to_json(self) -> dict[str, Any]:
        from corner_calculus.faces import lattice_to_json

        return {
            "hypersurface": self.hypersurface,
            "faces": {str(k): v for k, v in sorted(self.faces.items())},
            "dims": {str(k): v for k, v in self.dims.items()},
            "fibre_lattices": {str(k): lattice_to_json(g) for k, g in sorted(self.fibre_lattices.items())},
            "model": self.model.to_json(),
        }


def _hypersurface_equations(model: GeneralizedProductModel, h: str, k: int) -> list[sympy.Expr]:
    if h in model.base_boundary:
        return [sym(h)]
    if h.endswith("=1") and h[:-2] in model.base_boundary:
        return [sym(h[:-2]) - 1]
    if h.startswith("s") and "=" in h:
        sign = 1 if h.endswith("+1") else -1
        return [sym(f"s{i}") - sign for i in range(1, k + 1)]
    raise DomainError(f"'{h}' is not a boundary hypersurface of M[1] in {model.kind}")


def fibre_lattice(lattice: nx.DiGraph, face: str) -> nx.DiGraph:
    """Faces of the hypersurface `face`: label sets through it, with `face` removed."""
    nodes = {n - {face} for n in lattice.nodes if face in n and len(n) > 1}
    g = nx.DiGraph()
    g.add_nodes_from(nodes)
    g.add_edges_from((a, b) for a, b in itertools.permutations(nodes, 2) if a < b)
    return nx.transitive_reduction(g) if g.number_of_nodes() else g


def _at_face(expr: sympy.Expr, face: str, where: str) -> sympy.Expr:
    num, den = sympy.fraction(sympy.cancel(expr))
    at = {sym(face): 0}
    den0 = sympy.expand(den.xreplace(at))
    if den0 == 0:
        raise ModelError(f"{where} is singular along {face}: {expr}")
    return sympy.cancel(num.xreplace(at) / den0)


def _face_coords(coords: OrthantChart, face: str) -> OrthantChart:
    return OrthantChart(tuple(n for n in coords.boundary if n != face), coords.interior)


def _face_chart(chart: Chart, ref: Chart, face: str, ambient: OrthantChart) -> Chart | None:
    """`chart` cut down to {face = 0}, written over the coordinates of `ref` there."""
    to_amb = {
        n: _at_face(chart.pull_back(e, ambient), face, f"Chart {chart.label}")
        for n, e in ref.from_ambient.items()
        if n != face
    }
    from_amb = {
        n: _at_face(ref.pull_back(e, ambient), face, f"Chart {chart.label}")
        for n, e in chart.from_ambient.items()
        if n != face
    }
    local = Chart(chart.label, _face_coords(chart.coords, face), to_amb, from_amb, parent=chart.parent)
    try:
        for system in chart.exclusions:
            local.add_exclusion([p.xreplace({sym(face): 0}) for p in system])
    except DomainError:
        return None
    return local


def _sub_on_face(chart: Chart, sub: AffinePSub, face: str) -> AffinePSub | None:
    eqs = [e.xreplace({sym(face): 0}) for e in sub.equations()]
    part = sub_from_equations(chart.coords, [e for e in eqs if e != 0], name=sub.name)
    if part is None or chart.excludes_sub(part):
        return None
    return part


def _reference(model: GeneralizedProductModel, k: int, face: str, center: str | None) -> tuple[Chart, Atlas]:
    """First chart meeting `face` once only the centre producing it is blown up."""
    seq = model.sequences.get(k)
    atlas = seq.initial if seq is not None else model.spaces[k]
    if center is not None:
        atlas = blow_up(atlas, center)
    for chart in atlas.charts:
        if face in chart.coords.boundary:
            return chart, atlas
    raise DomainError(f"No chart of M[{k}] in {model.kind} meets {face}")


def _face_map(
    model: GeneralizedProductModel, refs: dict[int, Chart], faces: dict[int, str], f: FinSetMap
) -> dict[str, sympy.Expr]:
    n, m = f.domain_size, f.codomain_size
    src, tgt = refs[m], refs[n]
    outer = {sym(k): v for k, v in structure_map(model, f).items()}
    return {
        name: _at_face(
            src.pull_back(sympy.sympify(e).xreplace(outer), model.ambient(m)), faces[m], f"S{list(f.values)}"
        )
        for name, e in tgt.from_ambient.items()
        if name != faces[n]
    }


def _face_atlas(model: GeneralizedProductModel, k: int, face: str, ref: Chart) -> Atlas:
    parent = model.spaces[k]
    charts: list[Chart] = []
    lifted: dict[str, dict[str, AffinePSub]] = {}
    registry: dict[str, str] = {}
    for chart in parent.charts:
        if face not in chart.coords.boundary:
            continue
        local = _face_chart(chart, ref, face, parent.ambient)
        if local is None:
            continue
        charts.append(local)
        parts = {}
        for sid, sub in parent.lifted.get(chart.label, {}).items():
            part = _sub_on_face(local, sub, face)
            if part is not None:
                parts[sid] = part
        lifted[chart.label] = parts
        registry.update({n: parent.registry[n] for n in local.coords.boundary})
    return Atlas(f"{parent.name}|{face}", _face_coords(ref.coords, face), charts, lifted, registry)


def boundary_product(model: GeneralizedProductModel, h: str) -> BoundaryProduct:
    """
    The hypersurface of each M[k] meeting the small diagonal over H, as a generalized
    product model of its own: spaces are the face charts, structure maps the restrictions.
    """
    atlas1 = model.spaces[1]
    if h not in atlas1.registry:
        raise DomainError(f"'{h}' is not a boundary hypersurface of M[1] in {model.kind}")
    faces: dict[int, str] = {}
    centers: dict[int, str | None] = {}
    for k in range(1, model.K + 1):
        chart = model.ambient(k)
        target = None
        if k > 1:
            small = model.diagonals[k][diagonal_name(Partition.indiscrete(k))]
            over = sub_from_equations(chart, _hypersurface_equations(model, h, k))
            target = intersect(small, over) if over is not None else None
        match = [cid for cid, c in model.centers.get(k, {}).items() if target is not None and c == target]
        centers[k] = match[0] if match else None
        faces[k] = front_face_label(match[0]) if match else h
    refs: dict[int, Chart] = {}
    face_model = GeneralizedProductModel(
        f"{model.kind}|{h}",
        model.K,
        model.mu - 1,
        model.kappa,
        FACE,
        (),
        (),
        model.blocks,
        generators=dict(model.generators),
        maps=partial(_face_map, model, refs, faces),
    )
    lattices: dict[int, nx.DiGraph] = {}
    for k in range(1, model.K + 1):
        ref, ref_atlas = _reference(model, k, faces[k], centers[k])
        refs[k] = ref
        space = _face_atlas(model, k, faces[k], ref)
        face_model.spaces[k] = space
        face_model.ambients[k] = space.ambient
        local = _face_chart(ref, ref, faces[k], ref_atlas.ambient)
        face_model.centers[k] = {}
        face_model.diagonals[k] = {}
        for sid, sub in ref_atlas.lifted.get(ref.label, {}).items():
            if sid in model.diagonals[k] and local is not None:
                part = _sub_on_face(local, sub, faces[k])
                if part is not None:
                    face_model.diagonals[k][sid] = part
        if k > 1:
            lattices[k] = fibre_lattice(face_lattice(model.spaces[k]), faces[k])
    logger.info("Boundary product of %s over %s: faces %s", model.kind, h, faces)
    return BoundaryProduct(h, faces, lattices, face_model)


# ---------------------------------------------------------------------------
# Multidiagonals
# ---------------------------------------------------------------------------


def preimage(model: GeneralizedProductModel, f: FinSetMap, sub: AffinePSub) -> AffinePSub | None:
    """S_f^{-1}(sub) for an ambient sub of M[n], as an ambient sub of M[m]."""
    at = {sym(n): e for n, e in structure_map(model, f).items()}
    eqs = [sympy.expand(e.xreplace(at)) for e in sub.equations()]
    return sub_from_equations(model.ambient(f.codomain_size), eqs)


def _restriction_is_bijective(model: GeneralizedProductModel, k: int, sub: AffinePSub, image: AffinePSub | None) -> bool:
    coords, params = sub.parametrize()
    at = dict(zip(model.ambient(k).symbols, coords))
    exprs = [sympy.expand(e.xreplace(at)) for e in structure_map(model, projection(k)).values()]
    if not params:
        return True
    jac = sympy.Matrix([[sympy.diff(e, t) for t in params] for e in exprs])
    target_dim = image.dim if image is not None else model.dim(k - 1)
    return jac.rank() == len(params) == target_dim


def diagonal_report(model: GeneralizedProductModel, k: int) -> dict[str, bool]:
    if not 2 <= k <= model.K:
        raise DomainError(f"diagonal_report needs 2 <= k <= K, got {k}")
    out: dict[str, bool] = {}
    diag = model.diagonals[k]
    big = model.diagonals[2][diagonal_name(Partition.indiscrete(2))]
    for i, j in itertools.combinations(range(1, k + 1), 2):
        name = diagonal_name(Partition.of(k, [[i, j]]))
        out[f"D_{i}{j} = Pi_{i}{j}^-1(D)"] = preimage(model, FinSetMap((i, j), k), big) == diag[name]
    if k >= 3:
        prev = model.diagonals[k - 1]
        for p in non_discrete_partitions(k - 1):
            lifted = Partition(k, p.blocks + ((k,),))
            out[f"Pi_{k}^-1({p.label()}) = {lifted.label()}"] = (
                preimage(model, projection(k), prev[diagonal_name(p)]) == diag[diagonal_name(lifted)]
            )
        d12, d13 = diag[diagonal_name(Partition.of(k, [[1, 2]]))], diag[diagonal_name(Partition.of(k, [[1, 3]]))]
        out["D_12 ∩ D_13 transversal"] = relation(d12, d13) == "Transversal"
        out["D_12 ∩ D_13 = D_123"] = intersect(d12, d13) == diag[diagonal_name(Partition.of(k, [[1, 2, 3]]))]
    for p in non_discrete_partitions(k):
        if (k,) in p.blocks:
            continue
        rest = p.restrict(k - 1)
        image = None if rest.is_discrete else model.diagonals[k - 1][diagonal_name(rest)]
        out[f"Pi_{k} on {p.label()} bijective"] = _restriction_is_bijective(model, k, diag[diagonal_name(p)], image)
    return out


# ---------------------------------------------------------------------------
# Simple support
# ---------------------------------------------------------------------------


def pullback_support(lifted: LiftedMap, support: Iterable[str]) -> set[str]:
    """Source hypersurfaces where the pull-back of a kernel supported on `support` is nontrivial."""
    support = set(support)
    return {label for label, image in lifted.image_table.items() if image <= support}


def simple_support_check(lifted: LiftedMap, support: Iterable[str], lattice: nx.DiGraph) -> bool:
    """No fixed hypersurface in the support, and support pairs with a common image never meet."""
    support = set(support)
    table = lifted.image_table
    if any(not table.get(label) for label in support):
        return False
    for a, b in itertools.combinations(sorted(support), 2):
        if table[a] & table[b] and any({a, b} <= n for n in lattice.nodes):
            return False
    return True

