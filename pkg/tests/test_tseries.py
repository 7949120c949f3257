from __future__ import annotations

from conftest import diffpolys
from gmpy2 import mpq
from hypothesis import given

from hodge.jetring import JetRing, dx
from hodge.tseries import TSpace, eval_on_tseries, topological_jets

SPACE = TSpace(range(0, 4), 4)
JETS = topological_jets(SPACE, 9)
R = JetRing(["s1"])
SVAL = {"s1": mpq(-3, 5)}


def test_topological_solution_low_order():
    v = JETS[0]
    assert v.coeff({0: 1}) == 1
    assert v.coeff({0: 1, 1: 1}) == 1
    assert v.coeff({0: 2, 2: 1}) == mpq(1, 2)
    assert v.coeff({0: 1, 1: 2}) == 1
    assert JETS[1].constant() == 1


def test_jets_are_x_derivatives():
    # v_{m+1} = d v_m / d t_0 on every retained coefficient below the cap
    for m in range(0, 5):
        a, b = JETS[m], JETS[m + 1]
        for key, c in b.terms.items():
            e = SPACE.exps(key)
            if sum(e.values()) >= SPACE.D - 1:
                continue
            e2 = dict(e)
            e2[0] = e2.get(0, 0) + 1
            assert a.coeff(e2) * e2[0] == c


@given(diffpolys(R, top=4, max_terms=3), diffpolys(R, top=4, max_terms=3, negative=False, log=False))
def test_evaluation_is_multiplicative(a, b):
    ea = eval_on_tseries(a, JETS, SVAL)
    eb = eval_on_tseries(b, JETS, SVAL)
    assert eval_on_tseries(a * b, JETS, SVAL) == ea * eb
    assert eval_on_tseries(a + b, JETS, SVAL) == ea + eb


def test_log_and_exp_inverse():
    s = JETS[1]
    assert s.log().exp() == s


def test_log_jet_evaluation():
    L = eval_on_tseries(R.L(), JETS)
    assert L == JETS[1].log()
    assert eval_on_tseries(dx(R.L()), JETS) == JETS[2] * JETS[1].inverse()
