"""
CLI Entry Point
---------------
Command-line front end: build generalized-product models, resolve families of
p-submanifolds, sweep blow-up orders, compare resolutions, check the product axioms,
export face lattices and evaluate Lie algebroid brackets.

Exit codes: 0 success, 1 property falsified, 2 input error.
"""

from __future__ import annotations

import argparse
import json
import logging
import sys
import uuid
from datetime import datetime
from pathlib import Path
from typing import Any, Sequence

from corner_calculus.atlas import Atlas, orthant_atlas
from corner_calculus.axioms import check_axioms, diagonal_report
from corner_calculus.blowup import resolve
from corner_calculus.config import Config, LimitsCfg, load_config
from corner_calculus.errors import CornerCalculusError, StepError
from corner_calculus.faces import check_equivalence, face_lattice, lattice_to_json, to_dot
from corner_calculus.genprod import (
    GeneralizedProductModel,
    IteratedFibrationModel,
    ad_construct,
    bphi_construct,
    fibre_product_model,
    group_model,
    scl_construct,
    twoscl_construct,
)
from corner_calculus.liealg import AlgebroidSection, anchor, bracket, commutator
from corner_calculus.orders import MODES, run_orders
from corner_calculus.repro import stable_json_dumps
from corner_calculus.run_meta import build_run_meta, write_run_meta
from corner_calculus.serialize import canonical, family_from_json, poly_terms
from corner_calculus.validator import require_keys

logger = logging.getLogger(__name__)

EXIT_OK, EXIT_FALSIFIED, EXIT_INPUT = 0, 1, 2
MODEL_KINDS = ("fibre_product", "group", "scl", "ad", "2scl", "bphi")
GROUPS = {"translation": "TranslationRn", "positive-reals": "PositiveReals"}


def _now_run_id() -> str:
    """Timestamp to the microsecond plus a short random tag."""
    return f"{datetime.now():%Y%m%d_%H%M%S_%f}_{uuid.uuid4().hex[:6]}"


def _safe_mkdir(p: Path) -> None:
    p.mkdir(parents=True, exist_ok=True)


def _write_json(path: Path, obj: Any, *, indent: int = 2) -> None:
    """Sorted keys and "p/q" rationals, so reruns are byte-identical."""
    path.write_text(
        json.dumps(canonical(obj), indent=indent, sort_keys=True, ensure_ascii=False) + "\n",
        encoding="utf-8",
    )


def _print_compact_json(obj: Any) -> None:
    print(stable_json_dumps(canonical(obj)))


def _read_json(path: str) -> Any:
    p = Path(path)
    if not p.exists():
        raise FileNotFoundError(path)
    return json.loads(p.read_text(encoding="utf-8"))


def _split_order(raw: str | Sequence[str] | None) -> list[str] | None:
    if raw is None:
        return None
    if isinstance(raw, str):
        return [s.strip() for s in raw.split(",") if s.strip()]
    return list(raw)


def _finish(
    cmd: str,
    root: Path,
    artifacts: dict[str, Path],
    *,
    run_id: str,
    cfg: Config,
    config_path: str | None,
    input_path: str | None,
    argv: list[str] | None,
    extra: dict[str, Any] | None = None,
) -> None:
    meta = build_run_meta(
        cmd=cmd,
        argv=argv or [],
        run_id=run_id,
        outputs_dir=root,
        config_path=config_path,
        config_obj=cfg,
        input_path=input_path,
        artifacts=artifacts,
    )
    meta.update(extra or {})
    write_run_meta(root, meta)


# ---------------------------------------------------------------------------
# Inputs
# ---------------------------------------------------------------------------


def model_spec_from_args(args: argparse.Namespace) -> dict[str, Any]:
    """Model document from --spec or from the individual flags."""
    if getattr(args, "spec", None):
        doc = _read_json(args.spec)
        if not isinstance(doc, dict):
            raise ValueError("Input Error: model spec must be a JSON object")
        return doc
    if not getattr(args, "kind", None):
        raise ValueError("Input Error: pass --spec or --kind")
    kind = args.kind.replace("-", "_")
    doc: dict[str, Any] = {"kind": kind, "K": args.K}
    if kind in ("fibre_product", "scl"):
        doc.update({"fibre_dim": args.fibre_dim, "base_dim": args.base_dim})
    if kind == "group":
        doc.update({"group": args.group, "n": args.n})
    if kind in ("ad", "2scl"):
        doc.update({"z_dim": args.z_dim, "q_dim": args.q_dim, "y_dim": args.y_dim})
    return doc


def build_model(doc: dict[str, Any], limits: LimitsCfg | None = None) -> GeneralizedProductModel:
    """
    Construct a model from {"kind": ..., "K": ...} plus kind-specific keys. An scl model
    takes its unresolved base either from a nested "base" document or from
    fibre_dim/base_dim.
    """
    if not isinstance(doc, dict) or doc.get("kind") not in MODEL_KINDS:
        raise ValueError(f"Input Error: model kind must be one of {list(MODEL_KINDS)}")
    kind = doc["kind"]
    keys = {
        "fibre_product": ["fibre_dim", "base_dim"],
        "group": ["group", "n"],
        "scl": ["fibre_dim", "base_dim", "base"],
        "ad": ["z_dim", "q_dim", "y_dim"],
        "2scl": ["z_dim", "q_dim", "y_dim"],
        "bphi": [],
    }[kind]
    require_keys(doc, ["kind", "K"], keys, path="model")
    K = int(doc["K"])
    if kind == "fibre_product":
        return fibre_product_model(int(doc.get("fibre_dim", 1)), int(doc.get("base_dim", 0)), K, limits=limits)
    if kind == "group":
        group = doc.get("group", "translation")
        if group not in GROUPS:
            raise ValueError(f"Input Error: group must be one of {sorted(GROUPS)}")
        return group_model(GROUPS[group], K, n=int(doc.get("n", 1)), limits=limits)
    if kind == "scl":
        if "base" in doc:
            base = build_model({**doc["base"], "K": K}, limits)
        else:
            base = fibre_product_model(int(doc.get("fibre_dim", 1)), int(doc.get("base_dim", 0)), K, limits=limits)
        return scl_construct(base, K, limits=limits)
    if kind == "bphi":
        return bphi_construct(K, limits=limits)
    ifib = IteratedFibrationModel(int(doc.get("z_dim", 1)), int(doc.get("q_dim", 1)), int(doc.get("y_dim", 0)))
    if kind == "ad":
        return ad_construct(ifib, K, limits=limits)
    return twoscl_construct(ifib, K, limits=limits)


def load_family(path: str) -> tuple[dict[str, Any], Atlas]:
    doc = _read_json(path)
    chart, subs = family_from_json(doc)
    return doc, orthant_atlas(chart, subs, name=str(doc.get("name", Path(path).stem)))


# ---------------------------------------------------------------------------
# Commands
# ---------------------------------------------------------------------------


def cmd_build(
    doc: dict[str, Any],
    *,
    config_path: str | None = None,
    out_dir: str = "outputs/build",
    run_id: str | None = None,
    argv: list[str] | None = None,
) -> int:
    """Build a model, write its manifest and one atlas file per level."""
    cfg = load_config(config_path)
    model = build_model(doc, cfg.limits)

    run_id = run_id or _now_run_id()
    root = Path(out_dir) / run_id
    _safe_mkdir(root)
    artifacts: dict[str, Path] = {}

    manifest = {"spec": doc, **model.to_json()}
    manifest_path = root / "manifest.json"
    _write_json(manifest_path, manifest, indent=cfg.output.indent)
    artifacts["manifest.json"] = manifest_path
    for k, atlas in sorted(model.spaces.items()):
        path = root / f"atlas_k{k}.json"
        _write_json(path, atlas.to_json(), indent=cfg.output.indent)
        artifacts[path.name] = path

    _finish("build", root, artifacts, run_id=run_id, cfg=cfg, config_path=config_path, input_path=None, argv=argv)
    _print_compact_json(
        {"run_id": run_id, "artifacts_dir": str(root), "kind": model.kind, "front_faces": manifest["front_faces"]}
    )
    return EXIT_OK


def cmd_resolve(
    family_path: str,
    *,
    order: list[str] | None = None,
    config_path: str | None = None,
    out_dir: str = "outputs/resolve",
    run_id: str | None = None,
    argv: list[str] | None = None,
) -> int:
    """Blow up a family's centres in order; exit 1 when a step fails."""
    cfg = load_config(config_path)
    doc, atlas = load_family(family_path)
    order = order or _split_order(doc.get("order")) or atlas.sub_ids()
    tracked = _split_order(doc.get("tracked")) or []

    run_id = run_id or _now_run_id()
    root = Path(out_dir) / run_id
    _safe_mkdir(root)
    artifacts: dict[str, Path] = {}

    try:
        seq = resolve(atlas, order, tracked)
    except StepError as exc:
        report = {"order": order, "step_error": {"index": exc.index, "center": exc.center, "reason": str(exc)}}
        code = EXIT_FALSIFIED
    else:
        report = seq.to_json()
        atlas_path = root / "atlas.json"
        _write_json(atlas_path, seq.final.to_json(), indent=cfg.output.indent)
        artifacts["atlas.json"] = atlas_path
        code = EXIT_OK

    report_path = root / "sequence.json"
    _write_json(report_path, report, indent=cfg.output.indent)
    artifacts["sequence.json"] = report_path
    _finish("resolve", root, artifacts, run_id=run_id, cfg=cfg, config_path=config_path, input_path=family_path, argv=argv)
    _print_compact_json({"run_id": run_id, "artifacts_dir": str(root), "exit_code": code})
    return code


def cmd_orders(
    family_path: str,
    *,
    mode: str = "classify",
    cap: int | None = None,
    config_path: str | None = None,
    out_dir: str = "outputs/orders",
    run_id: str | None = None,
    argv: list[str] | None = None,
) -> int:
    """Enumerate, classify and cross-check every order of the family's centres."""
    cfg = load_config(config_path)
    doc, atlas = load_family(family_path)
    ids = _split_order(doc.get("order")) or atlas.sub_ids()
    tracked = [t for t in _split_order(doc.get("tracked")) or [] if t not in ids]
    report = run_orders(
        atlas,
        ids,
        mode=mode,
        cap=cap if cap is not None else cfg.limits.order_cap,
        threads=cfg.threads,
        tracked=tracked,
    )

    run_id = run_id or _now_run_id()
    root = Path(out_dir) / run_id
    _safe_mkdir(root)
    report_path = root / "orders.json"
    _write_json(report_path, report.to_json(), indent=cfg.output.indent)
    _finish(
        "orders",
        root,
        {"orders.json": report_path},
        run_id=run_id,
        cfg=cfg,
        config_path=config_path,
        input_path=family_path,
        argv=argv,
        extra={"mode": mode},
    )
    code = EXIT_FALSIFIED if report.falsified else EXIT_OK
    _print_compact_json({"run_id": run_id, "orders": len(report.outcomes), "counts": report.counts, "exit_code": code})
    return code


def cmd_equiv(
    family_path: str,
    order_a: list[str],
    order_b: list[str],
    *,
    config_path: str | None = None,
    out_dir: str = "outputs/equiv",
    run_id: str | None = None,
    argv: list[str] | None = None,
) -> int:
    cfg = load_config(config_path)
    _, atlas = load_family(family_path)
    try:
        a = resolve(atlas, order_a).final
        b = resolve(atlas, order_b).final
    except StepError as exc:
        result: dict[str, Any] = {"status": "StepError", "reasons": [str(exc)]}
        code = EXIT_FALSIFIED
    else:
        res = check_equivalence(a, b)
        result = res.to_json()
        code = EXIT_OK if res.equivalent else EXIT_FALSIFIED

    run_id = run_id or _now_run_id()
    root = Path(out_dir) / run_id
    _safe_mkdir(root)
    path = root / "equivalence.json"
    _write_json(path, {"order_a": order_a, "order_b": order_b, **result}, indent=cfg.output.indent)
    _finish("equiv", root, {"equivalence.json": path}, run_id=run_id, cfg=cfg, config_path=config_path, input_path=family_path, argv=argv)
    _print_compact_json({"run_id": run_id, "status": result["status"], "exit_code": code})
    return code


def cmd_axioms(
    doc: dict[str, Any],
    *,
    config_path: str | None = None,
    out_dir: str = "outputs/axioms",
    run_id: str | None = None,
    argv: list[str] | None = None,
) -> int:
    """Check the generalized-product axioms and the diagonal lemmas for a model."""
    cfg = load_config(config_path)
    model = build_model(doc, cfg.limits)
    report = check_axioms(model)
    diagonals = {str(k): diagonal_report(model, k) for k in range(2, model.K + 1)}
    ok = report.passed and all(all(d.values()) for d in diagonals.values())

    run_id = run_id or _now_run_id()
    root = Path(out_dir) / run_id
    _safe_mkdir(root)
    path = root / "axioms.json"
    _write_json(path, {"model": model.kind, **report.to_json(), "diagonals": diagonals}, indent=cfg.output.indent)
    _finish("axioms", root, {"axioms.json": path}, run_id=run_id, cfg=cfg, config_path=config_path, input_path=None, argv=argv)
    code = EXIT_OK if ok else EXIT_FALSIFIED
    _print_compact_json({"run_id": run_id, "model": model.kind, "passed": ok, "exit_code": code})
    return code


def cmd_export(
    *,
    family_path: str | None = None,
    order: list[str] | None = None,
    model_doc: dict[str, Any] | None = None,
    level: int | None = None,
    fmt: str = "json",
    out: str | None = None,
    config_path: str | None = None,
) -> int:
    """Export the boundary face lattice of a resolved family or of a model level as JSON or DOT."""
    cfg = load_config(config_path)
    if fmt not in ("json", "dot"):
        raise ValueError(f"Input Error: unknown format '{fmt}'")
    if family_path is not None:
        doc, atlas = load_family(family_path)
        order = order if order is not None else _split_order(doc.get("order")) or []
        atlas = resolve(atlas, order).final if order else atlas
    elif model_doc is not None:
        model = build_model(model_doc, cfg.limits)
        k = level or model.K
        if k not in model.spaces:
            raise ValueError(f"Input Error: level {k} not built (K={model.K})")
        atlas = model.spaces[k]
    else:
        raise ValueError("Input Error: pass --family or a model")
    g = face_lattice(atlas)
    if fmt == "dot":
        text = to_dot(g, name=atlas.name)
    else:
        text = json.dumps(canonical(lattice_to_json(g)), indent=cfg.output.indent, sort_keys=True) + "\n"
    if out:
        Path(out).write_text(text, encoding="utf-8")
    else:
        sys.stdout.write(text)
    return EXIT_OK


def cmd_bracket(
    doc: dict[str, Any],
    v1: dict[str, str],
    v2: dict[str, str],
    *,
    config_path: str | None = None,
) -> int:
    """Bracket of two sections, plus the anchor-homomorphism check; exit 1 when it fails."""
    cfg = load_config(config_path)
    model = build_model(doc, cfg.limits)
    a = AlgebroidSection.of(model, v1)
    b = AlgebroidSection.of(model, v2)
    out = bracket(a, b, model, max_degree=cfg.limits.max_poly_degree)
    m1 = model.ambient(1)
    homomorphism = (anchor(out, model) + commutator(anchor(a, model), anchor(b, model)).scale(-1)).is_zero()
    _print_compact_json(
        {
            "model": model.kind,
            "bracket": {n: poly_terms(c, m1) for n, c in out.as_dict().items()},
            "anchor_homomorphism": homomorphism,
        }
    )
    return EXIT_OK if homomorphism else EXIT_FALSIFIED


# ---------------------------------------------------------------------------
# Parser
# ---------------------------------------------------------------------------


def _add_model_args(p: argparse.ArgumentParser) -> None:
    p.add_argument("--spec", default=None, help="Model spec JSON (overrides the flags below)")
    p.add_argument("--kind", choices=[k.replace("_", "-") for k in MODEL_KINDS], default=None)
    p.add_argument("--K", type=int, default=3)
    p.add_argument("--fibre-dim", type=int, default=1)
    p.add_argument("--base-dim", type=int, default=0)
    p.add_argument("--group", choices=sorted(GROUPS), default="translation")
    p.add_argument("--n", type=int, default=1)
    p.add_argument("--z-dim", type=int, default=1)
    p.add_argument("--q-dim", type=int, default=1)
    p.add_argument("--y-dim", type=int, default=0)


def _add_run_args(p: argparse.ArgumentParser, out_dir: str) -> None:
    p.add_argument("--config", default=None)
    p.add_argument("--out-dir", default=out_dir)
    p.add_argument("--run-id", default=None)


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="corner-calculus")
    p.add_argument("--log-level", default=None, help="Overrides runtime.log_level")
    sub = p.add_subparsers(dest="cmd", required=True)

    p_build = sub.add_parser("build", help="Build a generalized-product model")
    _add_model_args(p_build)
    _add_run_args(p_build, "outputs/build")

    p_res = sub.add_parser("resolve", help="Resolve a family of p-submanifolds")
    p_res.add_argument("--family", required=True)
    p_res.add_argument("--order", default=None, help="Comma-separated centre ids")
    _add_run_args(p_res, "outputs/resolve")

    p_ord = sub.add_parser("orders", help="Sweep all blow-up orders of a family")
    p_ord.add_argument("--family", required=True)
    p_ord.add_argument("--mode", choices=list(MODES), default="classify")
    p_ord.add_argument("--cap", type=int, default=None)
    _add_run_args(p_ord, "outputs/orders")

    p_eq = sub.add_parser("equiv", help="Compare the resolutions of two orders")
    p_eq.add_argument("--family", required=True)
    p_eq.add_argument("--order-a", required=True)
    p_eq.add_argument("--order-b", required=True)
    _add_run_args(p_eq, "outputs/equiv")

    p_ax = sub.add_parser("axioms", help="Check the generalized-product axioms")
    _add_model_args(p_ax)
    _add_run_args(p_ax, "outputs/axioms")

    p_lat = sub.add_parser("lattice", help="Export a boundary face lattice")
    p_lat.add_argument("--family", default=None)
    p_lat.add_argument("--order", default=None)
    p_lat.add_argument("--level", type=int, default=None)
    p_lat.add_argument("--format", dest="fmt", choices=["json", "dot"], default="json")
    p_lat.add_argument("--out", default=None)
    p_lat.add_argument("--config", default=None)
    _add_model_args(p_lat)

    p_br = sub.add_parser("bracket", help="Lie algebroid bracket of two sections")
    _add_model_args(p_br)
    p_br.add_argument("--v1", required=True, help='JSON object, e.g. {"z1": "z1"}')
    p_br.add_argument("--v2", required=True)
    p_br.add_argument("--config", default=None)
    return p


def _dispatch(args: argparse.Namespace, argv_list: list[str]) -> int:
    if args.cmd == "build":
        return cmd_build(
            model_spec_from_args(args),
            config_path=args.config,
            out_dir=args.out_dir,
            run_id=args.run_id,
            argv=argv_list,
        )
    if args.cmd == "resolve":
        return cmd_resolve(
            args.family,
            order=_split_order(args.order),
            config_path=args.config,
            out_dir=args.out_dir,
            run_id=args.run_id,
            argv=argv_list,
        )
    if args.cmd == "orders":
        return cmd_orders(
            args.family,
            mode=args.mode,
            cap=args.cap,
            config_path=args.config,
            out_dir=args.out_dir,
            run_id=args.run_id,
            argv=argv_list,
        )
    if args.cmd == "equiv":
        return cmd_equiv(
            args.family,
            _split_order(args.order_a) or [],
            _split_order(args.order_b) or [],
            config_path=args.config,
            out_dir=args.out_dir,
            run_id=args.run_id,
            argv=argv_list,
        )
    if args.cmd == "axioms":
        return cmd_axioms(
            model_spec_from_args(args),
            config_path=args.config,
            out_dir=args.out_dir,
            run_id=args.run_id,
            argv=argv_list,
        )
    if args.cmd == "lattice":
        return cmd_export(
            family_path=args.family,
            order=_split_order(args.order),
            model_doc=None if args.family else model_spec_from_args(args),
            level=args.level,
            fmt=args.fmt,
            out=args.out,
            config_path=args.config,
        )
    if args.cmd == "bracket":
        v1, v2 = json.loads(args.v1), json.loads(args.v2)
        if not isinstance(v1, dict) or not isinstance(v2, dict):
            raise ValueError("Input Error: --v1 and --v2 must be JSON objects")
        return cmd_bracket(model_spec_from_args(args), v1, v2, config_path=args.config)
    raise ValueError(f"Unknown command: {args.cmd}")


def main(argv: list[str] | None = None) -> int:
    args = build_parser().parse_args(argv)
    argv_list = list(argv) if argv is not None else sys.argv[1:]
    level = args.log_level
    if level is None and getattr(args, "config", None) is None:
        level = Config().runtime.log_level
    elif level is None:
        try:
            level = load_config(args.config).runtime.log_level
        except (ValueError, FileNotFoundError):
            level = "WARNING"
    logging.basicConfig(level=level.upper(), format="%(levelname)s %(name)s: %(message)s")

    try:
        return _dispatch(args, argv_list)
    except (CornerCalculusError, ValueError, FileNotFoundError) as exc:
        # json.JSONDecodeError is a ValueError
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_INPUT


if __name__ == "__main__":
    sys.exit(main())
