"""
Tests for corner_calculus.faces
-------------------------------
Coverage:
- Face lattice of the blown-up quarter plane: nodes, edges, JSON and DOT output.
- Equivalence: self-comparison, registry mismatch, commuting disjoint centres,
  both order classes of the three-coplanar-lines family.
- Lifted maps: identity, blow-down, missing components, uncovered charts, targets
  whose exclusions contain the image of a source stratum.
"""

import pytest

from corner_calculus.arrangement import sub_from_equations
from corner_calculus.atlas import orthant_atlas
from corner_calculus.blowup import blow_up, resolve
from corner_calculus.errors import ChartCoverageError, DomainError
from corner_calculus.faces import (
    EQUIVALENT,
    INEQUIVALENT,
    check_equivalence,
    face_lattice,
    lattice_to_json,
    lift_map,
    same_lattice,
    to_dot,
)
from corner_calculus.orthant import sym


@pytest.fixture
def corner_atlas(corner_chart):
    corner = sub_from_equations(corner_chart, [], zeros=("x", "y"))
    return orthant_atlas(corner_chart, {"C": corner}, name="corner")


@pytest.fixture
def identity_map():
    return {n: sym(n) for n in ("x", "y", "w")}


def test_quarter_plane_lattice(corner_atlas):
    g = face_lattice(corner_atlas)
    assert set(g.nodes) == {frozenset({"x"}), frozenset({"y"}), frozenset({"x", "y"})}
    assert g.number_of_edges() == 2


def test_blown_up_corner_lattice(corner_atlas):
    g = face_lattice(blow_up(corner_atlas, "C"))
    doc = lattice_to_json(g)
    assert doc["nodes"] == ["ff[C]", "x", "y", "ff[C],x", "ff[C],y"]
    assert doc["edges"] == [
        ["ff[C]", "ff[C],x"],
        ["ff[C]", "ff[C],y"],
        ["x", "ff[C],x"],
        ["y", "ff[C],y"],
    ]
    assert g.nodes[frozenset({"x", "ff[C]"})]["codim"] == 2


def test_lattice_dot_output(corner_atlas):
    source = to_dot(face_lattice(blow_up(corner_atlas, "C")), name="corner")
    assert source.startswith("digraph corner")
    assert 'x -> "ff[C],x"' in source
    assert "y -> x" not in source


def test_self_equivalence(corner_atlas):
    out = blow_up(corner_atlas, "C")
    result = check_equivalence(out, out)
    assert result.status == EQUIVALENT
    assert result.partners["a:0.C:x"] == "0.C:x"
    assert set(result.partners) == {"a:0.C:x", "a:0.C:y", "b:0.C:x", "b:0.C:y"}


def test_registry_mismatch_is_inequivalent(corner_atlas):
    result = check_equivalence(corner_atlas, blow_up(corner_atlas, "C"))
    assert result.status == INEQUIVALENT
    assert not result.equivalent
    assert "registries" in result.reasons[0]


def test_disjoint_centres_commute(corner_chart):
    subs = {
        "A": sub_from_equations(corner_chart, ["w"], zeros=("x",)),
        "B": sub_from_equations(corner_chart, ["w - 1"], zeros=("y",)),
    }
    atlas = orthant_atlas(corner_chart, subs)
    ab = resolve(atlas, ["A", "B"]).final
    ba = resolve(atlas, ["B", "A"]).final
    assert same_lattice(face_lattice(ab), face_lattice(ba))
    assert check_equivalence(ab, ba).equivalent


def test_coplanar_lines_orders_share_registry_and_lattice(lines_atlas):
    a = resolve(lines_atlas, ["F1", "F2", "F3", "F4"]).final
    b = resolve(lines_atlas, ["F2", "F1", "F3", "F4"]).final
    assert a.registry == b.registry
    assert same_lattice(face_lattice(a), face_lattice(b))


@pytest.mark.slow
def test_coplanar_lines_orders_are_equivalent(lines_atlas):
    a = resolve(lines_atlas, ["F1", "F2", "F3", "F4"]).final
    b = resolve(lines_atlas, ["F2", "F1", "F3", "F4"]).final
    result = check_equivalence(a, b)
    assert result.status == EQUIVALENT, result.reasons


def test_lift_identity(corner_atlas, identity_map):
    lifted = lift_map(identity_map, corner_atlas, corner_atlas)
    assert [(c.source, c.target) for c in lifted.charts] == [("0", "0")]
    assert lifted.is_simple and lifted.is_b_fibration
    assert lifted.image_table == {"x": {"x"}, "y": {"y"}}


def test_lift_blow_down(corner_atlas, identity_map):
    blown = blow_up(corner_atlas, "C")
    lifted = lift_map(identity_map, blown, corner_atlas)
    assert lifted.uncovered == []
    assert lifted.is_b_map
    assert not lifted.is_b_fibration
    assert lifted.image_table["ff[C]"] == {"x", "y"}
    assert lifted.to_json()["image_table"]["ff[C]"] == ["x", "y"]


def test_lift_rejects_missing_components(corner_atlas):
    with pytest.raises(DomainError):
        lift_map({"x": sym("x")}, corner_atlas, corner_atlas)


def test_lift_without_covering_chart_raises(corner_atlas):
    shifted = {"x": sym("x") + 1, "y": sym("y"), "w": sym("w")}
    with pytest.raises(ChartCoverageError):
        lift_map(shifted, corner_atlas, corner_atlas)


@pytest.fixture
def tangled_atlas(corner_chart):
    subs = {
        "C": sub_from_equations(corner_chart, [], zeros=("x", "y")),
        "Q": sub_from_equations(corner_chart, ["x + y - 1"]),
    }
    return blow_up(orthant_atlas(corner_chart, subs), "C")


def test_lift_skips_targets_whose_exclusions_hold_the_image(corner_atlas, identity_map, tangled_atlas):
    assert tangled_atlas.chart("0.r").excludes_stratum([0, 1])
    with pytest.raises(ChartCoverageError):
        lift_map(identity_map, corner_atlas, tangled_atlas)


def test_lift_into_charts_with_exclusions(identity_map, tangled_atlas):
    lifted = lift_map(identity_map, tangled_atlas, tangled_atlas)
    assert [(c.source, c.target) for c in lifted.charts] == [
        ("0.C:x", "0.C:x"),
        ("0.C:y", "0.C:y"),
        ("0.r", "0.r"),
    ]
    assert lifted.is_simple
