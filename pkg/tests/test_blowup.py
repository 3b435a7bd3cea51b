"""
Tests for corner_calculus.blowup
--------------------------------
Coverage:
- Blow-up of a codim-2 corner: two charts, labels, coordinates, front-face registry,
  lifts of members meeting or inside the centre.
- Members missing the centre: carried affinely, excluded where their lift is not affine,
  and a remainder chart only when the projective charts miss part of them.
- Boundary hypersurface centres are the identity.
- Interior centres: one chart per normal coordinate and sign; 2n charts for a point of ℝⁿ.
- Iterated resolution of the three-coplanar-lines family in both order classes.
- Step errors: unknown centres, centres that are not p-positioned.
"""

import pytest
import sympy

from corner_calculus.arrangement import is_p_positioned, sub_from_equations
from corner_calculus.atlas import ORIGINAL, cocycle_holds, orthant_atlas
from corner_calculus.blowup import blow_up, front_face_label, lift_sub, remaining_p_clean, resolve
from corner_calculus.errors import DomainError, NotPPositioned, StepError, UnsupportedCenter
from corner_calculus.orthant import OrthantChart, sym


@pytest.fixture
def corner_atlas(corner_chart):
    subs = {
        "C": sub_from_equations(corner_chart, [], zeros=("x", "y")),
        "H": sub_from_equations(corner_chart, ["w"]),
        "P": sub_from_equations(corner_chart, ["w"], zeros=("x", "y")),
    }
    return orthant_atlas(corner_chart, subs, name="corner")


def test_corner_blow_up_charts(corner_atlas):
    out = blow_up(corner_atlas, "C")
    assert [c.label for c in out.charts] == ["0.C:x", "0.C:y"]
    chart = out.chart("0.C:x")
    assert chart.coords.boundary == ("ff[C]", "y")
    assert chart.coords.interior == ("w",)
    ff, y = chart.coords.symbols[:2]
    assert chart.to_ambient["x"] == ff
    assert chart.to_ambient["y"] == ff * y
    assert out.centers == ["C"]


def test_corner_blow_up_registry(corner_atlas):
    out = blow_up(corner_atlas, "C")
    assert out.registry["x"] == ORIGINAL
    assert out.registry[front_face_label("C")] == "FrontFace(C)"
    assert out.hypersurfaces() == ["ff[C]", "x", "y"]


def test_corner_lifts(corner_atlas):
    out = blow_up(corner_atlas, "C")
    for label in ("0.C:x", "0.C:y"):
        assert "H" in out.lifted[label]
        assert "C" not in out.lifted[label]
    inside = out.lifted["0.C:x"]["P"]
    assert inside.zeros == frozenset({0})
    assert inside.dim == 1


def test_member_missing_the_corner_is_carried(corner_chart):
    subs = {
        "C": sub_from_equations(corner_chart, [], zeros=("x", "y")),
        "L": sub_from_equations(corner_chart, ["x - 2"], zeros=("y",)),
    }
    out = blow_up(orthant_atlas(corner_chart, subs), "C")
    assert [c.label for c in out.charts] == ["0.C:x", "0.C:y"]
    part = out.lifted["0.C:x"]["L"]
    assert part.zeros == frozenset({1})
    assert part.equations()[1] == sym("ff[C]") - 2
    assert "L" not in out.lifted["0.C:y"]


def test_remainder_only_for_members_the_charts_miss(corner_chart):
    subs = {
        "C": sub_from_equations(corner_chart, [], zeros=("x", "y")),
        "Q": sub_from_equations(corner_chart, ["x + y - 1"]),
    }
    out = blow_up(orthant_atlas(corner_chart, subs), "C")
    assert [c.label for c in out.charts] == ["0.C:x", "0.C:y", "0.r"]
    rest = out.chart("0.r")
    assert rest.excludes_stratum([0, 1])
    assert not rest.excludes_stratum([0])
    assert set(out.lifted["0.r"]) == {"Q"}
    for label in ("0.C:x", "0.C:y"):
        assert "Q" not in out.lifted[label]
        assert out.chart(label).exclusions
    assert cocycle_holds(out, "0.C:x", "0.C:y", "0.r")
    assert cocycle_holds(out, "0.r", "0.C:x", "0.C:y")


def test_line_off_an_interior_point_needs_no_remainder():
    plane = OrthantChart((), ("a", "b"))
    subs = {
        "P": sub_from_equations(plane, ["a", "b"]),
        "S": sub_from_equations(plane, ["a - 1"]),
    }
    out = blow_up(orthant_atlas(plane, subs), "P")
    assert [c.label for c in out.charts] == ["0.P:u1_1+", "0.P:u1_1-", "0.P:u1_2+", "0.P:u1_2-"]
    assert out.lifted["0.P:u1_1+"]["S"].equations() == [sym("ff[P]") - 1]
    assert "S" not in out.lifted["0.P:u1_1-"]
    for label in ("0.P:u1_2+", "0.P:u1_2-"):
        assert "S" not in out.lifted[label]
        assert out.chart(label).exclusions


def test_corner_cocycle(corner_atlas):
    out = blow_up(corner_atlas, "C")
    assert cocycle_holds(out, "0.C:x", "0.C:y", "0.C:x")


def test_boundary_hypersurface_centre_is_identity(corner_chart):
    face = sub_from_equations(corner_chart, [], zeros=("x",))
    atlas = orthant_atlas(corner_chart, {"X": face})
    out = blow_up(atlas, "X")
    assert [c.label for c in out.charts] == ["0"]
    assert out.registry == atlas.registry
    assert "X" not in out.lifted["0"]


def test_interior_centre_gives_signed_charts(lines_atlas):
    out = blow_up(lines_atlas, "F1")
    assert [c.label for c in out.charts] == [
        "0.F1:u1_1+",
        "0.F1:u1_1-",
        "0.F1:u1_2+",
        "0.F1:u1_2-",
    ]
    chart = out.chart("0.F1:u1_1+")
    assert chart.coords.boundary == ("ff[F1]",)
    assert chart.coords.interior == ("U1_2", "x2")
    assert sympy.expand(chart.to_ambient["x3"] - sym("ff[F1]") * sym("U1_2")) == 0


def test_interior_centre_lifts(lines_atlas):
    out = blow_up(lines_atlas, "F1")
    near_x1 = out.lifted["0.F1:u1_1+"]
    assert set(near_x1) == {"F2", "F3", "F4"}
    assert near_x1["F2"].zeros == frozenset({0})
    near_x3 = out.lifted["0.F1:u1_2+"]
    assert set(near_x3) == {"F2"}
    assert set(out.lifted["0.F1:u1_1-"]) == {"F2", "F3", "F4"}
    assert "0.r" not in out.lifted


def test_lift_sub_parts(lines_atlas):
    parts = lift_sub(lines_atlas, "F4", "F1")
    assert set(parts) == {"0.F1:u1_1+", "0.F1:u1_1-"}
    assert all(is_p_positioned(p) for p in parts.values())
    with pytest.raises(DomainError):
        lift_sub(lines_atlas, "F9", "F1")


def test_lines_through_the_front_face_are_not_p_clean(lines_atlas):
    out = blow_up(lines_atlas, "F1")
    assert not remaining_p_clean(out, ["F2", "F3", "F4"])
    assert remaining_p_clean(out, ["F3"])


def test_intersection_order_regains_cleanliness(lines_atlas):
    seq = resolve(lines_atlas, ["F1", "F2", "F3", "F4"])
    flags = [s.remaining_p_clean for s in seq.steps]
    assert flags[:2] == [False, True]
    assert not seq.all_clean
    assert seq.final.centers == ["F1", "F2", "F3", "F4"]
    assert {f"ff[F{i}]" for i in range(1, 5)} <= set(seq.final.registry)


def test_size_order_stays_clean(lines_atlas):
    seq = resolve(lines_atlas, ["F2", "F1", "F3", "F4"])
    assert seq.all_clean
    assert [s.center for s in seq.steps] == ["F2", "F1", "F3", "F4"]
    doc = seq.to_json()
    assert doc["order"] == ["F2", "F1", "F3", "F4"]
    assert doc["charts"] == len(seq.final.charts)


def test_origin_blow_up_separates_the_lines(lines_atlas):
    out = blow_up(lines_atlas, "F2")
    assert len(out.charts) == 6
    assert set(out.lifted["0.F2:u1_1+"]) == {"F3", "F4"}
    assert set(out.lifted["0.F2:u1_2+"]) == {"F1", "F4"}
    assert out.lifted["0.F2:u1_3+"] == {}


def test_unknown_centre_is_a_step_error(lines_atlas):
    with pytest.raises(StepError) as info:
        resolve(lines_atlas, ["F1", "nope"])
    assert info.value.index == 1
    assert info.value.center == "nope"
    assert isinstance(info.value.__cause__, UnsupportedCenter)


def test_diagonal_through_corner_is_a_step_error():
    square = OrthantChart(("x1", "x2"))
    diag = sub_from_equations(square, ["x1 - x2"])
    atlas = orthant_atlas(square, {"D": diag})
    with pytest.raises(StepError) as info:
        resolve(atlas, ["D"])
    assert info.value.index == 0
    assert isinstance(info.value.__cause__, NotPPositioned)
