"""
Tests for corner_calculus.run_meta
----------------------------------
Coverage:
- Input and config digests (provenance).
- Artifact hashing; missing artifacts are an error.
- Stable JSON digests ignore key order.
"""

import json
from pathlib import Path

import pytest

from corner_calculus.config import Config
from corner_calculus.repro import document_digest, sha256_file, stable_json_dumps
from corner_calculus.run_meta import build_run_meta, write_run_meta


def test_run_meta_records_input_digest(tmp_path: Path) -> None:
    p = tmp_path / "family.json"
    p.write_text('{"chart": {"boundary": ["x"]}, "submanifolds": {}}', encoding="utf-8")

    meta = build_run_meta(
        cmd="classify",
        argv=["classify", str(p)],
        run_id="t",
        outputs_dir=tmp_path,
        input_path=str(p),
        seed=5,
    )

    assert meta["input_path"] == str(p)
    assert meta["input_sha256"] == sha256_file(p)
    assert meta["seed"] == 5
    assert "sympy" in meta["env"]["packages"]


def test_config_dump_is_hashed(tmp_path: Path) -> None:
    meta = build_run_meta(cmd="x", argv=[], run_id="t", outputs_dir=tmp_path, config_obj=Config())
    assert meta["config_dump"]["limits"]["max_level"] == 4
    assert meta["config_dump_sha256"] == document_digest(meta["config_dump"])


def test_artifact_hashing(tmp_path: Path) -> None:
    art = tmp_path / "certificate.json"
    payload = '{"status": "EQUIVALENT"}'
    art.write_text(payload, encoding="utf-8")

    meta = build_run_meta(
        cmd="equiv",
        argv=[],
        run_id="artifacts",
        outputs_dir=tmp_path,
        artifacts={"certificate.json": art},
    )

    info = meta["artifacts"]["certificate.json"]
    assert info["bytes"] == len(payload)
    assert info["sha256"] == sha256_file(art)

    with pytest.raises(FileNotFoundError):
        build_run_meta(
            cmd="equiv", argv=[], run_id="x", outputs_dir=tmp_path, artifacts={"gone": tmp_path / "gone"}
        )


def test_write_run_meta(tmp_path: Path) -> None:
    path = write_run_meta(tmp_path / "out", {"cmd": "resolve"})
    assert path.name == "run_meta.json"
    assert json.loads(path.read_text(encoding="utf-8")) == {"cmd": "resolve"}


def test_stable_json_ignores_key_order() -> None:
    assert stable_json_dumps({"b": 1, "a": [1, 2]}) == '{"a":[1,2],"b":1}'
    assert document_digest({"b": 1, "a": 2}) == document_digest({"a": 2, "b": 1})
