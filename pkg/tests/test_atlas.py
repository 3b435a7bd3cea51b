"""
Tests for corner_calculus.atlas
-------------------------------
Coverage:
- Single-chart orthant atlas: registry of original faces, carried subs.
- Box atlas: one chart per vertex, far faces excluded, subs pulled into charts.
- Interval atlas: a chart per endpoint of each [0, 1] coordinate, far end labelled "c=1".
- Exclusions: whole-chart exclusions rejected, empty systems ignored.
- Transitions and the cocycle identity.
"""

import pytest
import sympy

from corner_calculus.arrangement import sub_from_equations
from corner_calculus.atlas import (
    ORIGINAL,
    Chart,
    box_atlas,
    interval_atlas,
    cocycle_holds,
    orthant_atlas,
    sub_in_chart,
    transition,
    transition_map,
)
from corner_calculus.errors import DomainError
from corner_calculus.orthant import OrthantChart, sym


def test_orthant_atlas_registry_and_subs(corner_chart):
    corner = sub_from_equations(corner_chart, [], zeros=("x", "y"), name="C")
    atlas = orthant_atlas(corner_chart, {"C": corner})
    assert [c.label for c in atlas.charts] == ["0"]
    assert atlas.registry == {"x": ORIGINAL, "y": ORIGINAL}
    assert atlas.sub_ids() == ["C"]
    assert atlas.charts_with("C")[0].label == "0"


def test_orthant_atlas_rejects_foreign_sub(corner_chart):
    other = OrthantChart(("x",))
    sub = sub_from_equations(other, [], zeros=("x",))
    with pytest.raises(DomainError):
        orthant_atlas(corner_chart, {"X": sub})


def test_box_atlas_charts_and_registry():
    atlas = box_atlas(2)
    assert sorted(c.label for c in atlas.charts) == ["++", "+-", "-+", "--"]
    assert atlas.hypersurfaces() == ["s1=+1", "s1=-1", "s2=+1", "s2=-1"]
    chart = atlas.chart("+-")
    assert chart.coords.boundary == ("s1=+1", "s2=-1")
    assert len(chart.exclusions) == 2


def test_box_atlas_far_face_is_excluded():
    chart = box_atlas(1).chart("+")
    assert not chart.excludes_stratum([0])
    t = chart.coords.symbols[0]
    far = sub_from_equations(chart.coords, [t - 2])
    assert far is not None
    assert chart.excludes_sub(far)


def test_box_atlas_pulls_subs_into_every_chart_they_meet():
    s1, s2 = sym("s1"), sym("s2")
    atlas = box_atlas(2, {"diag": [s1 - s2], "edge": [s1 - 1]})
    assert {c.label for c in atlas.charts_with("diag")} == {"++", "+-", "-+", "--"}
    assert {c.label for c in atlas.charts_with("edge")} == {"++", "+-"}
    edge = atlas.lifted["++"]["edge"]
    assert edge.zeros == frozenset({0})


def test_interval_atlas_adds_the_far_end(corner_chart):
    corner = sub_from_equations(corner_chart, [], zeros=("x", "y"))
    top = sub_from_equations(corner_chart, ["x - 1"])
    atlas = interval_atlas(corner_chart, {"C": corner, "T": top}, ends=("x",))
    assert [c.label for c in atlas.charts] == ["0", "x=1"]
    assert atlas.hypersurfaces() == ["x", "x=1", "y"]
    far = atlas.chart("x=1")
    assert far.coords.boundary == ("x=1", "y")
    assert far.to_ambient["x"] == 1 - sym("x=1")
    assert "C" not in atlas.lifted["x=1"]
    assert atlas.lifted["x=1"]["T"].zeros == frozenset({0})
    assert "T" not in atlas.lifted["0"]
    assert cocycle_holds(atlas, "0", "x=1", "0")
    with pytest.raises(DomainError):
        interval_atlas(corner_chart, ends=("w",))


def test_sub_in_chart_absent_when_excluded():
    atlas = box_atlas(1)
    chart = atlas.chart("+")
    assert sub_in_chart(chart, atlas.ambient, [sym("s1") + 1]) is None
    assert sub_in_chart(chart, atlas.ambient, [sym("s1") - 3]) is None


def test_whole_chart_exclusion_raises_and_empty_system_is_ignored(corner_chart):
    chart = Chart("c", corner_chart, {}, {})
    with pytest.raises(DomainError):
        chart.add_exclusion([sympy.Integer(0)])
    chart.add_exclusion([sympy.Integer(1)])
    assert chart.exclusions == []
    chart.add_exclusion([sym("x"), sym("y")])
    chart.add_exclusion([sym("x"), sym("y")])
    assert len(chart.exclusions) == 1


def test_box_transitions_and_cocycle():
    atlas = box_atlas(2)
    t = transition(atlas, "++", "-+")
    a1 = atlas.chart("++").coords.symbols[0]
    assert sympy.simplify(t["s1=-1"] - (2 - a1)) == 0
    assert cocycle_holds(atlas, "++", "-+", "--")
    assert cocycle_holds(atlas, "+-", "--", "++")


def test_transition_map_to_self_is_identity():
    atlas = box_atlas(1)
    f = transition_map(atlas, "+", "+")
    assert f.as_expressions() == {"s1=+1": atlas.chart("+").coords.symbols[0]}
