"""
Tests for corner_calculus.liealg
--------------------------------
Coverage:
- Polynomial vector fields: validation, b-tangency, commutator.
- Sections: first-factor directions only, degree caps.
- Simplicial extension and the bracket on fibre products and an ε-scaled model.
- Anchor as a Lie algebra homomorphism on examples; Jacobi on random linear triples.
- The bracket against the plain commutator on every pair of monomial sections of degree
  at most two (fibre dimension two is slow), with and without base dependence.
- Extensions restrict back to the section on the diagonal.
"""

import itertools

import pytest
import sympy
from sympy.polys.monomials import itermonomials

from corner_calculus.errors import DomainError, PreconditionError
from corner_calculus.genprod import PRODUCT, GeneralizedProductModel, fibre_product_model
from corner_calculus.liealg import (
    AlgebroidSection,
    PolyVectorField,
    algebroid_generators,
    anchor,
    bracket,
    commutator,
    restrict_to_diagonal,
    simplicial_extend,
)
from corner_calculus.orthant import OrthantChart, sym


@pytest.fixture
def model():
    return fibre_product_model(2, 0, 3)


@pytest.fixture
def eps_model():
    """Ambient scl layout without resolution; the bracket only needs coordinates."""
    return GeneralizedProductModel("scl-ambient", 3, 2, 1, PRODUCT, ("eps",), (), (("z", 1),))


def test_vector_field_validation():
    plane = OrthantChart((), ("x", "y"))
    with pytest.raises(DomainError):
        PolyVectorField.of(plane, {"t": 1})
    with pytest.raises(DomainError):
        PolyVectorField(plane, (sym("q"), sympy.Integer(0)))
    with pytest.raises(DomainError):
        PolyVectorField(plane, (sympy.Integer(1),))


def test_b_tangency():
    half = OrthantChart(("x",), ("y",))
    PolyVectorField.of(half, {"x": "x*y", "y": 1}, b_flag=True)
    with pytest.raises(DomainError):
        PolyVectorField.of(half, {"x": "y"}, b_flag=True)


def test_commutator_of_plane_fields():
    plane = OrthantChart((), ("x", "y"))
    a = PolyVectorField.of(plane, {"y": "x"})
    b = PolyVectorField.of(plane, {"x": "y"})
    c = commutator(a, b)
    assert c.as_dict() == {"x": sym("x"), "y": -sym("y")}
    assert commutator(a, a).is_zero()
    assert (a + b).degree() == 1


def test_section_rejects_foreign_directions(model):
    with pytest.raises(DomainError):
        AlgebroidSection.of(model, {"z2_1": 1})
    with pytest.raises(DomainError):
        AlgebroidSection.of(model, {"z1_1": "z2_1"})


def test_bracket_on_fibre_product(model):
    v1 = AlgebroidSection.of(model, {"z1_2": "z1_1"})
    v2 = AlgebroidSection.of(model, {"z1_1": "z1_2"})
    out = bracket(v1, v2, model)
    assert out.as_dict() == {"z1_1": sym("z1_1"), "z1_2": -sym("z1_2")}


def test_bracket_is_antisymmetric(model):
    v1 = AlgebroidSection.of(model, {"z1_1": "z1_1**2"})
    v2 = AlgebroidSection.of(model, {"z1_2": "z1_1*z1_2"})
    a, b = bracket(v1, v2, model), bracket(v2, v1, model)
    assert all(sympy.expand(a.as_dict().get(n, 0) + b.as_dict().get(n, 0)) == 0 for n in ("z1_1", "z1_2"))


def test_anchor_is_a_homomorphism(model):
    v1 = AlgebroidSection.of(model, {"z1_2": "z1_1"})
    v2 = AlgebroidSection.of(model, {"z1_1": "z1_2**2"})
    lhs = anchor(bracket(v1, v2, model), model)
    rhs = commutator(anchor(v1, model), anchor(v2, model))
    assert (lhs + rhs.scale(-1)).is_zero()


def test_extension_lives_on_the_first_factor(model):
    v = AlgebroidSection.of(model, {"z1_1": "z1_2"})
    ext = simplicial_extend(v, model)
    assert ext.chart == model.ambient(2)
    assert ext.as_dict() == {"z1_1": sym("z1_2")}


def test_eps_scaled_bracket(eps_model):
    v1 = AlgebroidSection.of(eps_model, {"z1": "eps"})
    v2 = AlgebroidSection.of(eps_model, {"z1": "eps*z1"})
    out = bracket(v1, v2, eps_model)
    assert out.as_dict() == {"z1": sym("eps") ** 2}
    assert anchor(out, eps_model).as_dict() == {"z1": sym("eps") ** 2}


def test_bracket_needs_three_points_and_respects_degree_cap():
    small = fibre_product_model(1, 0, 2)
    v = AlgebroidSection.of(small, {"z1": 1})
    with pytest.raises(PreconditionError):
        bracket(v, v, small)
    big = fibre_product_model(1, 0, 3)
    w = AlgebroidSection.of(big, {"z1": "z1**5"})
    with pytest.raises(PreconditionError):
        bracket(w, w, big, max_degree=4)


def test_generators_of_eps_model(eps_model):
    eps_model.algebroid = [{"z1": sym("eps")}]
    gens = algebroid_generators(eps_model)
    assert len(gens) == 1
    assert gens[0].to_json() == {"components": {"z1": [{"coeff": "1", "exponents": {"eps": 1}}]}}


def _random_section(rng, model):
    names = model.factor(2, 1)
    comps = {}
    for n in names:
        c0, c1, c2 = (int(v) for v in rng.integers(-2, 3, size=3))
        comps[n] = f"{c0} + {c1}*z1_1 + {c2}*z1_2"
    return AlgebroidSection.of(model, comps)


def test_jacobi_on_random_linear_triples(model, rng):
    for _ in range(3):
        a, b, c = (_random_section(rng, model) for _ in range(3))
        total = {}
        for x, y, z in ((a, b, c), (b, c, a), (c, a, b)):
            for n, v in bracket(x, bracket(y, z, model), model).as_dict().items():
                total[n] = total.get(n, 0) + v
        assert all(sympy.expand(v) == 0 for v in total.values())


def _monomial_sections(model, degree):
    monomials = sorted(itermonomials(model.ambient(1).symbols, degree), key=sympy.default_sort_key)
    return [AlgebroidSection.of(model, {n: m}) for n in model.factor(2, 1) for m in monomials]


def _as_field(v, model):
    return PolyVectorField.of(model.ambient(1), v.as_dict())


@pytest.mark.parametrize("kappa", [1, pytest.param(2, marks=pytest.mark.slow)])
def test_bracket_is_the_fibrewise_commutator_on_quadratic_sections(kappa):
    product = fibre_product_model(kappa, 0, 3)
    basis = _monomial_sections(product, 2)
    assert len(basis) == (3 if kappa == 1 else 12)
    for v1, v2 in itertools.product(basis, repeat=2):
        expected = commutator(_as_field(v1, product), _as_field(v2, product))
        assert bracket(v1, v2, product).as_dict() == expected.as_dict(), (v1.as_dict(), v2.as_dict())


def test_base_dependent_bracket():
    family = fibre_product_model(1, 1, 3)
    v1 = AlgebroidSection.of(family, {"z1": "y*z1"})
    v2 = AlgebroidSection.of(family, {"z1": "y"})
    out = bracket(v1, v2, family)
    assert out.as_dict() == {"z1": -sym("y") ** 2}
    assert anchor(out, family).as_dict() == {"z1": -sym("y") ** 2}
    assert anchor(v1, family).as_dict() == {"z1": sym("y") * sym("z1")}


@pytest.mark.parametrize(
    "comps",
    [{"z1_1": "z1_2**2"}, {"z1_2": "z1_1*z1_2 - 3"}, {"z1_1": 1, "z1_2": "z1_1"}],
)
def test_extension_restricts_to_the_section(model, comps):
    v = AlgebroidSection.of(model, comps)
    assert restrict_to_diagonal(simplicial_extend(v, model), model).as_dict() == v.as_dict()


def test_eps_extension_restricts_to_the_section(eps_model):
    v = AlgebroidSection.of(eps_model, {"z1": "eps**2*z1"})
    assert restrict_to_diagonal(simplicial_extend(v, eps_model), eps_model).as_dict() == v.as_dict()
