from __future__ import annotations

from math import factorial

from conftest import diffpolys
from gmpy2 import mpq
from hypothesis import given, strategies as st

from hodge.jetring import JetRing, degbar, dx, dx_n
from hodge.point_frobenius import (alt_sum, dk_apply, dk_on_jet, flow_tderiv, omega, pair_tderiv_altsum,
                                   second_tderiv_altsum, theta, tr_u, velocity)

R = JetRing([])


def test_two_point_functions():
    assert theta(R, 0) == R.v(0)
    assert theta(R, 2) == R.v(0, 3).scale(mpq(1, 6))
    assert omega(R, 0, 0) == R.v(0)
    assert omega(R, 1, 2) == R.v(0, 4).scale(mpq(1, 8))


def test_two_point_recursion():
    for s in range(1, 7):
        for p in range(7):
            for q in range(7):
                lhs = omega(R, p + s, q) + omega(R, p, q + s).scale((-1) ** (s - 1))
                rhs = R.zero()
                for ell in range(s):
                    rhs = rhs + (omega(R, p, ell) * omega(R, s - 1 - ell, q)).scale((-1) ** ell)
                assert lhs == rhs, (s, p, q)


def test_alternating_trace():
    for N in range(13):
        tot = R.zero()
        for p in range(N + 1):
            tot = tot + omega(R, p, N - p).scale((-1) ** p)
        assert tot == (tr_u(R) if N == 0 else R.zero())


def test_alt_sum_against_direct_products():
    base = [R.v(0, p).scale(mpq(1, factorial(p))) for p in range(9)]
    for l in range(9):
        for m in range(9):
            for N in range(9):
                direct = R.zero()
                for p in range(N + 1):
                    direct = direct + (dx_n(base[p], l) * dx_n(base[N - p], m)).scale((-1) ** p)
                assert direct == alt_sum(R, l, m, N), (l, m, N)
                if l + m < N:
                    assert not direct.terms
                elif direct.terms:
                    assert degbar(direct) <= l + m - N


def test_velocity():
    assert velocity(R, 1, 0) == R.v(0) * R.v(1)
    assert velocity(R, 2, 1) == dx(R.v(0, 2) * R.v(1)).scale(mpq(1, 2))


@given(diffpolys(JetRing(["s1"]), top=4, max_terms=3), st.integers(0, 3), st.integers(0, 3))
def test_principal_flows_commute(f, p, q):
    assert flow_tderiv(flow_tderiv(f, p), q) == flow_tderiv(flow_tderiv(f, q), p)


def test_dk_kills_low_jets_and_lowers_degree():
    for k in range(1, 4):
        for m in range(11):
            d = dk_on_jet(R, k, m)
            if m < 2 * k:
                assert not d.terms
            elif d.terms:
                assert degbar(d) <= m - 2 * k


def test_dk_leading_value():
    for k in range(1, 5):
        assert dk_on_jet(R, k, 2 * k) == -R.v(1, 2 * k)


@given(diffpolys(R, top=6, max_terms=3), diffpolys(R, top=6, max_terms=3), st.integers(1, 3))
def test_dk_is_a_derivation(f, g, k):
    assert dk_apply(k, f * g) == dk_apply(k, f) * g + f * dk_apply(k, g)


def test_alternating_flows_kill_single_jets():
    for N in range(1, 6):
        for m in range(6):
            assert not second_tderiv_altsum(R.v(m), N).terms


def test_pair_altsum_symmetry():
    f = R.v(2) * R.monomial(v1=-1)
    # (-1)^p swaps under p <-> N-p for even N, so the sum is symmetric in the two arguments
    g = R.L()
    assert pair_tderiv_altsum(f, g, 4) == pair_tderiv_altsum(g, f, 4)
