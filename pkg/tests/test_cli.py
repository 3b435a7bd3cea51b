"""
Tests for corner_calculus.cli
-----------------------------
Coverage:
- Commands: build, resolve, orders, equiv, axioms, lattice, bracket.
- Exit codes: 0 success, 1 falsified / failed step, 2 input error.
- run_meta.json provenance next to every artifact directory.
- Default run ids are unique within one second.
"""

import json
import re

import pytest

from corner_calculus.cli import (
    EXIT_FALSIFIED,
    EXIT_INPUT,
    EXIT_OK,
    _now_run_id,
    build_model,
    cmd_export,
    cmd_resolve,
    main,
)


def _read(path):
    return json.loads(path.read_text(encoding="utf-8"))


def test_build_writes_manifest_and_atlases(tmp_path, base_config):
    argv = ["build", "--kind", "fibre-product", "--K", "3", "--config", base_config,
            "--out-dir", str(tmp_path), "--run-id", "b"]
    assert main(argv) == EXIT_OK
    root = tmp_path / "b"
    manifest = _read(root / "manifest.json")
    assert manifest["kind"] == "fibre_product"
    assert manifest["dims"] == {"1": 1, "2": 2, "3": 3}
    assert sorted(p.name for p in root.glob("atlas_k*.json")) == ["atlas_k1.json", "atlas_k2.json", "atlas_k3.json"]
    meta = _read(root / "run_meta.json")
    assert meta["argv"] == argv
    assert "manifest.json" in meta["artifacts"]


def test_resolve_corner(tmp_path, families_dir, capsys):
    family = str(families_dir / "corner.json")
    code = main(["resolve", "--family", family, "--out-dir", str(tmp_path), "--run-id", "r"])
    assert code == EXIT_OK
    seq = _read(tmp_path / "r" / "sequence.json")
    assert seq["order"] == ["C"]
    assert seq["registry"]["ff[C]"] == "FrontFace(C)"
    assert (tmp_path / "r" / "atlas.json").exists()
    assert _read(tmp_path / "r" / "run_meta.json")["input_path"] == family
    assert json.loads(capsys.readouterr().out)["exit_code"] == EXIT_OK


def test_resolve_reports_failed_step(tmp_path, families_dir):
    code = cmd_resolve(str(families_dir / "corner.json"), order=["Z"], out_dir=str(tmp_path), run_id="r")
    assert code == EXIT_FALSIFIED
    report = _read(tmp_path / "r" / "sequence.json")
    assert report["step_error"]["index"] == 0
    assert report["step_error"]["center"] == "Z"
    assert not (tmp_path / "r" / "atlas.json").exists()


def test_orders_enumerate(tmp_path, families_dir):
    code = main(["orders", "--family", str(families_dir / "coplanar_lines.json"), "--mode", "enumerate",
                 "--out-dir", str(tmp_path), "--run-id", "o"])
    assert code == EXIT_OK
    report = _read(tmp_path / "o" / "orders.json")
    assert report["orders"] == 24
    assert _read(tmp_path / "o" / "run_meta.json")["mode"] == "enumerate"


def test_orders_cap_is_an_input_error(tmp_path, families_dir):
    code = main(["orders", "--family", str(families_dir / "coplanar_lines.json"), "--cap", "5",
                 "--out-dir", str(tmp_path)])
    assert code == EXIT_INPUT


def test_orders_on_a_family_that_is_not_p_clean_is_an_input_error(tmp_path):
    family = tmp_path / "diagonal.json"
    family.write_text(json.dumps({
        "name": "diagonal",
        "chart": {"boundary": ["x1", "x2"], "interior": []},
        "submanifolds": {"D": {"equations": ["x1 - x2"]}, "P": {"zeros": ["x1", "x2"]}},
    }), encoding="utf-8")
    code = main(["orders", "--family", str(family), "--out-dir", str(tmp_path), "--run-id", "o"])
    assert code == EXIT_INPUT
    assert not (tmp_path / "o").exists()


def test_equiv_same_order(tmp_path, families_dir):
    code = main(["equiv", "--family", str(families_dir / "corner.json"), "--order-a", "C", "--order-b", "C",
                 "--out-dir", str(tmp_path), "--run-id", "e"])
    assert code == EXIT_OK
    assert _read(tmp_path / "e" / "equivalence.json")["status"] == "EQUIVALENT"


def test_axioms_on_fibre_product(tmp_path):
    code = main(["axioms", "--kind", "fibre-product", "--K", "3", "--out-dir", str(tmp_path), "--run-id", "a"])
    assert code == EXIT_OK
    doc = _read(tmp_path / "a" / "axioms.json")
    assert doc["passed"] is True
    assert set(doc["diagonals"]) == {"2", "3"}


def test_lattice_dot_and_json(tmp_path, families_dir, capsys):
    out = tmp_path / "faces.dot"
    assert main(["lattice", "--family", str(families_dir / "corner.json"), "--format", "dot", "--out", str(out)]) == EXIT_OK
    assert "digraph" in out.read_text(encoding="utf-8")
    assert main(["lattice", "--family", str(families_dir / "corner.json"), "--order", ""]) == EXIT_OK
    doc = json.loads(capsys.readouterr().out)
    assert doc["nodes"] == ["x", "y", "x,y"]


def test_bracket(capsys):
    code = main(["bracket", "--kind", "fibre-product", "--K", "3", "--v1", '{"z1": "1"}', "--v2", '{"z1": "z1"}'])
    assert code == EXIT_OK
    doc = json.loads(capsys.readouterr().out)
    assert doc["anchor_homomorphism"] is True
    assert doc["bracket"] == {"z1": [{"coeff": "1", "exponents": {}}]}


def test_input_errors(tmp_path, families_dir):
    assert main(["resolve", "--family", str(tmp_path / "missing.json"), "--out-dir", str(tmp_path)]) == EXIT_INPUT
    bad = tmp_path / "bad.yaml"
    bad.write_text("limits:\n  max_levle: 2\n", encoding="utf-8")
    assert main(["axioms", "--kind", "fibre-product", "--config", str(bad), "--out-dir", str(tmp_path)]) == EXIT_INPUT
    assert main(["bracket", "--kind", "fibre-product", "--v1", "[]", "--v2", "{}"]) == EXIT_INPUT
    garbled = tmp_path / "garbled.json"
    garbled.write_text("{not json", encoding="utf-8")
    assert main(["resolve", "--family", str(garbled), "--out-dir", str(tmp_path)]) == EXIT_INPUT


def test_build_model_rejects_unknown_kind_and_keys():
    with pytest.raises(ValueError):
        build_model({"kind": "torus", "K": 2})
    with pytest.raises(ValueError):
        build_model({"kind": "bphi", "K": 2, "fibre_dim": 1})


def test_export_is_byte_stable_and_rejects_unknown_formats(tmp_path, families_dir):
    family = str(families_dir / "coplanar_lines.json")
    first, second = tmp_path / "a.json", tmp_path / "b.json"
    assert cmd_export(family_path=family, order=["F2", "F1", "F3", "F4"], out=str(first)) == EXIT_OK
    assert cmd_export(family_path=family, order=["F2", "F1", "F3", "F4"], out=str(second)) == EXIT_OK
    assert first.read_bytes() == second.read_bytes()
    with pytest.raises(ValueError):
        cmd_export(family_path=family, fmt="svg")
    with pytest.raises(SystemExit) as exc:
        main(["lattice", "--family", family, "--format", "svg"])
    assert exc.value.code == 2


def test_export_of_an_interior_family_is_empty(tmp_path, families_dir):
    out = tmp_path / "empty.json"
    assert cmd_export(family_path=str(families_dir / "coplanar_lines.json"), order=[], out=str(out)) == EXIT_OK
    assert json.loads(out.read_text(encoding="utf-8")) == {"edges": [], "nodes": []}


def test_default_run_ids_do_not_collide():
    ids = [_now_run_id() for _ in range(20)]
    assert len(set(ids)) == len(ids)
    assert all(re.fullmatch(r"\d{8}_\d{6}_\d{6}_[0-9a-f]{6}", i) for i in ids)
