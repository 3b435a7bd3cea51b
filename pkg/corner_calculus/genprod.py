"""
Generalized Products
--------------------
Families of spaces M[k], k = 1..K, with structure maps S_I : M[m] -> M[n] for every map
I : J(n) -> J(m) of finite sets, built as resolved atlases over linear ambient models.

Ambient layouts:
    product     shared base coordinates, then one block of fibre coordinates per factor;
                S_I copies factor I(i) into slot i.
    difference  group models G^k / G in coordinates a_i = g_i - g_k (i < k).
    face        a boundary product: each M[k] is one hypersurface of a resolved model, in
                the coordinates of a reference chart, with structure maps restricted to it.
"""

from __future__ import annotations

import itertools
import logging
from dataclasses import dataclass, field
from typing import Any, Callable, Mapping, Sequence

import sympy

from corner_calculus.arrangement import (
    AffinePSub,
    diagonal_equations,
    diagonal_name,
    fibre_names,
    size_order,
    sub_from_equations,
)
from corner_calculus.atlas import Atlas, box_atlas, interval_atlas, orthant_atlas
from corner_calculus.blowup import BlowupSequence, resolve
from corner_calculus.config import LimitsCfg
from corner_calculus.errors import DomainError, ModelError, PreconditionError
from corner_calculus.finsetcat import FinSetMap, Partition, non_discrete_partitions
from corner_calculus.orthant import OrthantChart, sym

logger = logging.getLogger(__name__)

PRODUCT = "product"
DIFFERENCE = "difference"
FACE = "face"

# Structure-map generators as maps of finite sets (M[m] -> M[n] for I : J(n) -> J(m)).
GENERATORS: dict[str, FinSetMap] = {
    "Pi_L": FinSetMap((1,), 2),
    "Pi_R": FinSetMap((2,), 2),
    "Pi_S": FinSetMap((1, 2), 3),
    "Pi_F": FinSetMap((2, 3), 3),
    "Pi_C": FinSetMap((1, 3), 3),
    "D": FinSetMap((1, 1), 1),
    "R": FinSetMap((2, 1), 2),
}


def projection(k: int) -> FinSetMap:
    """Π_k : M[k] -> M[k-1], forgetting the last factor."""
    return FinSetMap(tuple(range(1, k)), k)


@dataclass(frozen=True)
class IteratedFibrationModel:
    """M -> F -> Y with fibres Z (of γ) and Q (of ψ); φ = ψ∘γ has fibre Z × Q."""

    z_dim: int
    q_dim: int
    y_dim: int = 0

    def __post_init__(self) -> None:
        if min(self.z_dim, self.q_dim, self.y_dim) < 0 or self.z_dim + self.q_dim < 1:
            raise PreconditionError(
                f"Fibre dims must be non-negative with Z+Q >= 1, got {self.z_dim}, {self.q_dim}"
            )

    @property
    def mu(self) -> int:
        return self.y_dim + self.q_dim + self.z_dim

    @property
    def kappa(self) -> int:
        return self.q_dim + self.z_dim

    def to_json(self) -> dict[str, int]:
        return {"z_dim": self.z_dim, "q_dim": self.q_dim, "y_dim": self.y_dim, "mu": self.mu, "kappa": self.kappa}


@dataclass
class GeneralizedProductModel:
    kind: str
    K: int
    mu: int
    kappa: int
    layout: str
    base_boundary: tuple[str, ...]
    base_interior: tuple[str, ...]
    blocks: tuple[tuple[str, int], ...]
    spaces: dict[int, Atlas] = field(default_factory=dict)
    centers: dict[int, dict[str, AffinePSub]] = field(default_factory=dict)
    diagonals: dict[int, dict[str, AffinePSub]] = field(default_factory=dict)
    sequences: dict[int, BlowupSequence] = field(default_factory=dict)
    generators: dict[str, FinSetMap] = field(default_factory=lambda: dict(GENERATORS))
    algebroid: list[dict[str, sympy.Expr]] = field(default_factory=list)
    notes: dict[str, Any] = field(default_factory=dict)
    ambients: dict[int, OrthantChart] = field(default_factory=dict)
    maps: Callable[[FinSetMap], dict[str, sympy.Expr]] | None = None

    def factor(self, k: int, i: int) -> list[str]:
        """Coordinate names of factor i in M[k] (difference layout: i < k)."""
        return [n for prefix, d in self.blocks for n in fibre_names(prefix, i, d)]

    def factor_count(self, k: int) -> int:
        return k - 1 if self.layout == DIFFERENCE else k

    def ambient(self, k: int) -> OrthantChart:
        if k in self.ambients:
            return self.ambients[k]
        interior = self.base_interior + tuple(
            n for i in range(1, self.factor_count(k) + 1) for n in self.factor(k, i)
        )
        return OrthantChart(self.base_boundary, interior)

    def dim(self, k: int) -> int:
        return self.mu + (k - 1) * self.kappa

    def to_json(self) -> dict[str, Any]:
        return {
            "kind": self.kind,
            "K": self.K,
            "mu": self.mu,
            "kappa": self.kappa,
            "layout": self.layout,
            "dims": {str(k): self.dim(k) for k in sorted(self.spaces)},
            "centers": {str(k): sorted(c) for k, c in sorted(self.centers.items())},
            "front_faces": {
                str(k): sum(1 for v in a.registry.values() if v != "Original")
                for k, a in sorted(self.spaces.items())
            },
            "hypersurfaces": {str(k): a.hypersurfaces() for k, a in sorted(self.spaces.items())},
            "generators": {name: list(m.values) for name, m in sorted(self.generators.items())},
            "algebroid": [{k: str(v) for k, v in g.items()} for g in self.algebroid],
            "notes": {k: v for k, v in sorted(self.notes.items())},
        }


# ---------------------------------------------------------------------------
# Structure maps
# ---------------------------------------------------------------------------


def structure_map(model: GeneralizedProductModel, f: FinSetMap) -> dict[str, sympy.Expr]:
    """S_f : M[m] -> M[n] as target coordinate -> expression in source coordinates."""
    if model.maps is not None:
        return model.maps(f)
    n, m = f.domain_size, f.codomain_size
    out: dict[str, sympy.Expr] = {b: sym(b) for b in model.base_boundary + model.base_interior}
    if model.layout == DIFFERENCE:
        def a(j: int, c: int) -> sympy.Expr:
            return sym(model.factor(m, j)[c]) if j < m else sympy.Integer(0)

        for i in range(1, n):
            for c, name in enumerate(model.factor(n, i)):
                out[name] = a(f(i), c) - a(f(n), c)
        return out
    for i in range(1, n + 1):
        for name, src in zip(model.factor(n, i), model.factor(m, f(i))):
            out[name] = sym(src)
    return out


def compose_exprs(
    outer: Mapping[str, sympy.Expr], inner: Mapping[str, sympy.Expr]
) -> dict[str, sympy.Expr]:
    """outer ∘ inner: substitute inner's components for the symbols outer is written in."""
    at = {sym(k): v for k, v in inner.items()}
    return {k: sympy.expand(sympy.sympify(v).xreplace(at)) for k, v in outer.items()}


def model_diagonal_equations(model: GeneralizedProductModel, k: int, p: Partition) -> list[sympy.Expr]:
    if model.layout == DIFFERENCE:
        def a(j: int, c: int) -> sympy.Expr:
            return sym(model.factor(k, j)[c]) if j < k else sympy.Integer(0)

        width = len(model.factor(k, 1))
        return [
            a(x, c) - a(y, c)
            for block in p.blocks
            for x, y in zip(block, block[1:])
            for c in range(width)
        ]
    return diagonal_equations(p, [model.factor(k, i) for i in range(1, k + 1)])


def ambient_diagonals(model: GeneralizedProductModel, k: int) -> dict[str, AffinePSub]:
    out: dict[str, AffinePSub] = {}
    chart = model.ambient(k)
    for p in non_discrete_partitions(k):
        sub = sub_from_equations(chart, model_diagonal_equations(model, k, p), name=diagonal_name(p))
        if sub is None:
            raise ModelError(f"Diagonal {diagonal_name(p)} is empty in {model.kind}")
        out[sub.name] = sub
    return out


def _check_caps(model: GeneralizedProductModel, limits: LimitsCfg | None, max_level: int | None = None) -> None:
    limits = limits or LimitsCfg()
    cap = min(limits.max_level, max_level) if max_level else limits.max_level
    if model.K < 1 or model.K > cap:
        raise PreconditionError(f"K={model.K} outside [1, {cap}] for {model.kind}")
    if model.dim(model.K) > limits.max_ambient_dim:
        raise PreconditionError(
            f"dim M[{model.K}] = {model.dim(model.K)} exceeds max_ambient_dim {limits.max_ambient_dim}"
        )


def _single_chart_spaces(model: GeneralizedProductModel) -> None:
    for k in range(1, model.K + 1):
        model.diagonals[k] = ambient_diagonals(model, k)
        model.centers[k] = {}
        model.spaces[k] = orthant_atlas(model.ambient(k), model.diagonals[k], name=f"{model.kind}[{k}]")


def _base_names(prefix: str, dim: int) -> tuple[str, ...]:
    if dim == 1:
        return (prefix,)
    return tuple(f"{prefix}{i}" for i in range(1, dim + 1))


# ---------------------------------------------------------------------------
# Constructors
# ---------------------------------------------------------------------------


def fibre_product_model(
    kappa: int, base_dim: int, K: int, *, limits: LimitsCfg | None = None
) -> GeneralizedProductModel:
    """M[k] = Y × Z^k for the trivial fibration Y × Z -> Y."""
    if kappa < 1 or base_dim < 0 or K < 2:
        raise PreconditionError(f"fibre_product_model needs kappa >= 1, K >= 2; got {kappa}, {K}")
    model = GeneralizedProductModel(
        "fibre_product",
        K,
        base_dim + kappa,
        kappa,
        PRODUCT,
        (),
        _base_names("y", base_dim),
        (("z", kappa),),
    )
    _check_caps(model, limits)
    _single_chart_spaces(model)
    return model


def group_model(
    kind: str, K: int, *, n: int = 1, limits: LimitsCfg | None = None
) -> GeneralizedProductModel:
    """G[k] = G^k / G for G = ℝ^n under translation, or the positive reals in log coordinates."""
    if kind == "TranslationRn":
        prefix, name = "a", f"TranslationR{n}"
    elif kind == "PositiveReals":
        if K > 4:
            raise PreconditionError("PositiveReals model is limited to K <= 4")
        prefix, name, n = "l", "PositiveReals", 1
    else:
        raise DomainError(f"Unknown group kind: {kind}")
    model = GeneralizedProductModel(name, K, 0, n, DIFFERENCE, (), (), ((prefix, n),))
    _check_caps(model, limits)
    _single_chart_spaces(model)
    if kind == "PositiveReals":
        t = sympy.Symbol("t", positive=True)
        s = (t - 1) / (t + 1)
        model.notes["compactifying_coordinate"] = "s = (t - 1)/(t + 1), l = log t"
        model.notes["reflection_odd"] = bool(sympy.cancel(s.subs(t, 1 / t) + s) == 0)
    return model


def _scl_like(
    model: GeneralizedProductModel,
    stages: Sequence[tuple[str, str, Sequence[str]]],
    *,
    ends: Sequence[str],
    require_clean: bool = False,
) -> None:
    """
    Resolve each M[k] along the centres of every stage, stage by stage, each stage in size
    order. A stage is (boundary coordinate, centre prefix, fibre prefixes that must agree).
    The coordinates in `ends` range over [0, 1], so each carries a far face "c=1".
    """
    for k in range(1, model.K + 1):
        chart = model.ambient(k)
        diagonals = ambient_diagonals(model, k)
        centers: dict[str, AffinePSub] = {}
        order: list[str] = []
        for bname, cprefix, prefixes in stages:
            stage: list[AffinePSub] = []
            for p in non_discrete_partitions(k):
                blocks = [
                    [n for pre, d in model.blocks if pre in prefixes for n in fibre_names(pre, i, d)]
                    for i in range(1, k + 1)
                ]
                sub = sub_from_equations(
                    chart, diagonal_equations(p, blocks), zeros=(bname,), name=f"{cprefix}[{p.label()}]"
                )
                if sub is None:
                    raise ModelError(f"Centre {cprefix}[{p.label()}] is empty")
                stage.append(sub)
            for sub in size_order(stage):
                centers[sub.name] = sub
                order.append(sub.name)
        atlas = interval_atlas(chart, {**centers, **diagonals}, ends=ends, name=f"{model.kind}[{k}]")
        seq = resolve(atlas, order, tracked=list(diagonals))
        if require_clean and not seq.all_clean:
            bad = [s.center for s in seq.steps if not s.remaining_p_clean]
            raise ModelError(f"Lifted centres stop being p-clean after {bad} at k={k}")
        model.centers[k] = centers
        model.diagonals[k] = diagonals
        model.sequences[k] = seq
        model.spaces[k] = seq.final
        logger.info("%s: M[%d] resolved with %d centres, %d charts", model.kind, k, len(order), len(seq.final.charts))


def scl_construct(
    model: GeneralizedProductModel, K: int | None = None, *, limits: LimitsCfg | None = None
) -> GeneralizedProductModel:
    """[0,1]_ε × M[k] blown up along {ε = 0} × (all multidiagonals), in size order."""
    if "eps" in model.base_boundary:
        raise PreconditionError(f"Model {model.kind} already carries an ε coordinate")
    out = GeneralizedProductModel(
        f"scl({model.kind})",
        K or model.K,
        model.mu + 1,
        model.kappa,
        model.layout,
        ("eps",) + model.base_boundary,
        model.base_interior,
        model.blocks,
    )
    _check_caps(out, limits, max_level=4)
    prefixes = [pre for pre, _ in model.blocks]
    _scl_like(out, [("eps", "C", prefixes)], ends=("eps",))
    out.algebroid = [{n: sym("eps")} for n in out.factor(1, 1)] if out.layout == PRODUCT else []
    return out


def ad_construct(
    ifib: IteratedFibrationModel, K: int, *, limits: LimitsCfg | None = None
) -> GeneralizedProductModel:
    """[0,1]_ε × M^[k]_φ blown up along {ε = 0} × (γ-fibre diagonals)."""
    if K > 3:
        raise PreconditionError("ad_construct is limited to K <= 3")
    out = GeneralizedProductModel(
        "ad",
        K,
        ifib.mu + 1,
        ifib.kappa,
        PRODUCT,
        ("eps",),
        _base_names("y", ifib.y_dim),
        tuple(b for b in (("q", ifib.q_dim), ("z", ifib.z_dim)) if b[1] > 0),
    )
    _check_caps(out, limits, max_level=3)
    _scl_like(out, [("eps", "C", ["q"])] if ifib.q_dim else [], ends=("eps",))
    zs = fibre_names("z", 1, ifib.z_dim) if ifib.z_dim else []
    qs = fibre_names("q", 1, ifib.q_dim) if ifib.q_dim else []
    out.algebroid = [{n: sympy.Integer(1)} for n in zs] + [{n: sym("eps")} for n in qs]
    out.notes["fibration"] = ifib.to_json()
    return out


def twoscl_construct(
    ifib: IteratedFibrationModel, K: int, *, limits: LimitsCfg | None = None
) -> GeneralizedProductModel:
    """
    [0,1]_δ × M[k; scl φ] blown up along {δ = 0} × (lifted ψ-fibre diagonals). The lifted
    ψ-family must stay p-clean at every step.
    """
    if K > 3:
        raise PreconditionError("twoscl_construct is limited to K <= 3")
    out = GeneralizedProductModel(
        "2scl",
        K,
        ifib.mu + 2,
        ifib.kappa,
        PRODUCT,
        ("delta", "eps"),
        _base_names("y", ifib.y_dim),
        tuple(b for b in (("q", ifib.q_dim), ("z", ifib.z_dim)) if b[1] > 0),
    )
    _check_caps(out, limits, max_level=3)
    if out.dim(out.K) > 8:
        raise PreconditionError(f"twoscl_construct needs dim M[K] <= 8, got {out.dim(out.K)}")
    stages = [("eps", "C", ["q", "z"])]
    if ifib.q_dim:
        stages.append(("delta", "E", ["q"]))
    _scl_like(out, stages, ends=("delta", "eps"), require_clean=True)
    eps, delta = sym("eps"), sym("delta")
    zs = fibre_names("z", 1, ifib.z_dim) if ifib.z_dim else []
    qs = fibre_names("q", 1, ifib.q_dim) if ifib.q_dim else []
    out.algebroid = [{n: eps} for n in zs] + [{n: eps * delta} for n in qs]
    out.notes["fibration"] = ifib.to_json()
    return out


def bphi_construct(K: int, *, limits: LimitsCfg | None = None) -> GeneralizedProductModel:
    """
    Fibre products of the interval [-1, 1] with the corners H_{P,±} = {s_i = ±1, i in P},
    |P| >= 2, blown up in size order.
    """
    if K > 3:
        raise PreconditionError("bphi_construct is limited to K <= 3")
    out = GeneralizedProductModel("bphi", K, 1, 1, PRODUCT, (), (), (("s", 1),))
    _check_caps(out, limits, max_level=3)
    for k in range(1, K + 1):
        chart = out.ambient(k)
        diagonals = ambient_diagonals(out, k)
        centers: dict[str, AffinePSub] = {}
        center_eqs: dict[str, list[sympy.Expr]] = {}
        blocks = [b for size in range(2, k + 1) for b in itertools.combinations(range(1, k + 1), size)]
        for block in blocks:
            for sign, tag in ((1, "+"), (-1, "-")):
                cid = f"H[{''.join(map(str, block))}{tag}]"
                eqs = [sym(f"s{i}") - sign for i in block]
                sub = sub_from_equations(chart, eqs, name=cid)
                assert sub is not None
                centers[cid] = sub
                center_eqs[cid] = eqs
        order = [s.name for s in size_order(list(centers.values()))]
        subs = {**center_eqs, **{d: s.equations() for d, s in diagonals.items()}}
        atlas = box_atlas(k, subs, name=f"bphi[{k}]")
        seq = resolve(atlas, order, tracked=list(diagonals))
        out.centers[k] = centers
        out.diagonals[k] = diagonals
        out.sequences[k] = seq
        out.spaces[k] = seq.final
    return out


def interior_model(model: GeneralizedProductModel) -> GeneralizedProductModel:
    """The same structure maps on interiors: every boundary coordinate becomes interior."""
    out = GeneralizedProductModel(
        f"interior({model.kind})",
        model.K,
        model.mu,
        model.kappa,
        model.layout,
        (),
        model.base_boundary + model.base_interior,
        model.blocks,
        generators=dict(model.generators),
    )
    _single_chart_spaces(out)
    return out


def product_model(a: GeneralizedProductModel, b: GeneralizedProductModel) -> GeneralizedProductModel:
    """Factorwise product of two unresolved product-layout models."""
    if a.layout != PRODUCT or b.layout != PRODUCT:
        raise PreconditionError("product_model needs product-layout models")
    if any(a.centers.get(k) for k in a.centers) or any(b.centers.get(k) for k in b.centers):
        raise PreconditionError("product_model takes unresolved models")

    def rename(names: tuple[str, ...]) -> tuple[str, ...]:
        return tuple(f"{n}_b" for n in names)

    out = GeneralizedProductModel(
        f"{a.kind}×{b.kind}",
        min(a.K, b.K),
        a.mu + b.mu,
        a.kappa + b.kappa,
        PRODUCT,
        a.base_boundary + rename(b.base_boundary),
        a.base_interior + rename(b.base_interior),
        a.blocks + tuple((f"{pre}b", d) for pre, d in b.blocks),
    )
    if {pre for pre, _ in a.blocks} & {f"{pre}b" for pre, _ in b.blocks}:
        raise DomainError("Coordinate prefixes collide in product_model")
    _single_chart_spaces(out)
    return out
