from __future__ import annotations

import pytest
from conftest import diffpolys
from gmpy2 import mpq
from hypothesis import given, strategies as st

from hodge.hierarchy import (DiffOperator, Hierarchy, HierarchyError, MiuraMap, densities_equivalent, evolutionary,
                             skew_defect, variational_derivative)
from hodge.jetring import EpsExpansion, JetRing, dx, parse

R = JetRing(["s1"])


@st.composite
def operators(draw, max_order: int = 3):
    coeffs = {k: draw(diffpolys(R, top=4, max_terms=2)) for k in range(draw(st.integers(0, max_order)) + 1)
              if draw(st.booleans())}
    return DiffOperator(coeffs)


@given(operators(), operators(), operators())
def test_composition_associative(a, b, c):
    assert (a @ b) @ c == a @ (b @ c)


@given(operators(), operators())
def test_adjoint_reverses_products(a, b):
    assert (a @ b).adjoint() == b.adjoint() @ a.adjoint()
    assert a.adjoint().adjoint() == a


@given(operators(), operators(), diffpolys(R, top=3, max_terms=2))
def test_apply_respects_composition(a, b, f):
    if a.is_zero() or b.is_zero():
        return
    assert (a @ b).apply(f) == a.apply(b.apply(f))


@given(diffpolys(R))
def test_variational_derivative_kills_total_derivatives(f):
    assert not variational_derivative(dx(f)).terms


def test_variational_derivative_values():
    v = R.v
    assert variational_derivative(v(0, 3).scale(mpq(1, 6))) == v(0, 2).scale(mpq(1, 2))
    assert variational_derivative(v(1, 2).scale(mpq(-1, 2))) == v(2)
    assert variational_derivative(v(0) * v(1, 2)) == v(1, 2) - dx(v(0) * v(1)).scale(2)


@given(diffpolys(R, top=4, max_terms=3), diffpolys(R, top=4, max_terms=3))
def test_density_equivalence(a, b):
    assert densities_equivalent(a, a + dx(b))


def test_density_equivalence_detects_differences():
    a = R.v(1, 2)
    assert not densities_equivalent(a, a + R.v(0, 3))
    assert not densities_equivalent(a, a + R.const(1))


def test_linear_miura_map():
    # w = v + eps^2 v_2: inverse v = sum (-eps^2 d^2)^k w, operator dx -> (1 + eps^2 d^2)^2 dx
    N = 8
    m = MiuraMap(EpsExpansion(R, {0: R.v(0), 2: R.v(2)}, N))
    inv = m.inverse()
    for k in range(0, N // 2 + 1):
        assert inv[2 * k] == R.v(2 * k).scale((-1) ** k)
    assert m.check_roundtrip()
    one = EpsExpansion(R, {0: R.one()}, N)
    P = m.transform_operator(DiffOperator({1: one}))
    assert P.eps_slice(0) == {1: R.one()}
    assert P.eps_slice(2) == {3: R.const(2)}
    assert P.eps_slice(4) == {5: R.one()}
    assert P.eps_slice(6) == {}


def test_miura_flow_transport_matches_chain_rule():
    # w = v + eps^2 v_2 carries v_t = v_1 to w_t = w_1
    m = MiuraMap(EpsExpansion(R, {0: R.v(0), 2: R.v(2)}, 6))
    F = m.transform_flow(R.v(1))
    assert F == EpsExpansion.of(R.v(1), 6)


def test_miura_map_validation():
    with pytest.raises(HierarchyError):
        MiuraMap(EpsExpansion(R, {0: R.v(1)}, 2))
    with pytest.raises(HierarchyError):
        MiuraMap(EpsExpansion(R, {0: R.v(0), 1: R.v(2)}, 2))


def test_evolutionary_derivative():
    h = R.v(0, 2)
    assert evolutionary(h, R.v(1)) == dx(h)


@pytest.fixture(scope="module")
def hodge4(recursion):
    return Hierarchy({1: recursion.potential(1), 2: recursion.potential(2)}, 4)


def test_hierarchy_structure(hodge4):
    assert hodge4.miura.check_roundtrip()
    P = hodge4.operator()
    assert skew_defect(P).is_zero()
    assert P.apply(variational_derivative(hodge4.density(-1))).is_zero()


@pytest.mark.parametrize("q", [0, 1, 2])
def test_flows_hamiltonian(hodge4, q):
    assert hodge4.hamiltonian_check(q).is_zero()


@pytest.mark.parametrize("p,q", [(0, 1), (0, 2), (1, 2), (1, 3)])
def test_tau_symmetry_and_commutation(hodge4, p, q):
    assert hodge4.tau_symmetry_defect(p, q).is_zero()
    assert hodge4.commutator(p, q).is_zero()


def test_t0_flow_is_translation(hodge4):
    assert hodge4.flow(0) == EpsExpansion.of(hodge4.ring.v(1), 4)


def test_flow_for_velocity_is_linear(hodge4):
    r = hodge4.ring
    combo = hodge4.flow_for_velocity(r.v(0) * r.v(1) + r.v(1).scale(3))
    assert combo == hodge4.flow(1) + hodge4.flow(0).scale(3)


def test_hierarchy_validation(recursion):
    with pytest.raises(ValueError):
        Hierarchy({1: recursion.potential(1)}, 3)
    with pytest.raises(HierarchyError):
        Hierarchy({1: recursion.potential(1)}, 4)


def test_broken_operator_is_not_skew():
    P = DiffOperator({1: parse("v", R)})
    assert not skew_defect(P).is_zero()
