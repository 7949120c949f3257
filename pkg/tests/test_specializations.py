from __future__ import annotations

from fractions import Fraction
from math import factorial

import pytest
from gmpy2 import mpq

from hodge.jetring import JetRing, canonical_text
from hodge.specializations import (DEFAULT_CUBIC_SAMPLES, Report, _X_OVER_SIN, closed_form_operator, cubic_check,
                                   cubic_rule, ilw_check, ilw_rule, normal_form_check, normal_form_h1,
                                   standard_monomials, volterra_check, volterra_rule)


def _x_over_sin(n):
    # invert sin(x)/x = sum (-1)^k x^(2k) / (2k+1)! by long division
    s = [Fraction((-1) ** k, factorial(2 * k + 1)) for k in range(n)]
    out = []
    for k in range(n):
        c = (Fraction(int(k == 0)) - sum(out[j] * s[k - j] for j in range(k))) / s[0]
        out.append(c)
    return out


def test_x_over_sin_table():
    assert [Fraction(int(c.numerator), int(c.denominator)) for c in _X_OVER_SIN] == _x_over_sin(len(_X_OVER_SIN))


def test_parameter_rules():
    assert ilw_rule(1) == mpq(-1, 12)
    assert ilw_rule(2) == mpq(1, 360)
    assert volterra_rule(1) == mpq(1, 4)
    assert volterra_rule(2) == mpq(-1, 24)
    # the cubic family at (p, q) = (-2, 1) reduces to the Volterra rule
    for k in range(1, 5):
        assert cubic_rule(k, -2, 1) == volterra_rule(k)
    with pytest.raises(ValueError):
        cubic_rule(1, 1, -1)


def test_closed_form_operator_low_order():
    # leading dispersive term: (sum a_i^2) / 6 with sum a_i^2 = (p^2 + q^2 + (p+q)^2) / (4(p+q))
    p, q = mpq(3), mpq(1, 2)
    c = closed_form_operator(p, q, 6)
    assert c[1] == 1
    assert c[3] == (p * p + q * q + (p + q) ** 2) / (4 * (p + q)) / 6
    with pytest.raises(ValueError):
        closed_form_operator(1, 1, 12)


def test_standard_monomials():
    R = JetRing(["s1"])
    names = [[canonical_text(m) for m in standard_monomials(R, n)] for n in range(1, 5)]
    assert names == [["(1)*v1^2"], ["(1)*v2^2"], ["(1)*v3^2", "(1)*v2^3"],
                     ["(1)*v4^2", "(1)*v2*v3^2", "(1)*v2^4"]]


def _assert_report(rep: Report):
    bad = [f"{i.label}: got {i.got} want {i.want}" for i in rep.failures()]
    assert rep.ok, bad


def test_ilw(recursion):
    _assert_report(ilw_check(4, recursion))


def test_volterra(recursion):
    _assert_report(volterra_check(4, recursion))


def test_cubic(recursion):
    rep = cubic_check(6, DEFAULT_CUBIC_SAMPLES, recursion)
    _assert_report(rep)
    assert sum("jet-free" in i.label for i in rep.items) >= 3


def test_cubic_other_samples(recursion):
    _assert_report(cubic_check(4, [(mpq(5, 3), mpq(-1, 7)), (2, 2), (-1, 3)], recursion))


def test_normal_form(recursion):
    _assert_report(normal_form_check(6, recursion))


@pytest.mark.slow
def test_normal_form_eps8(recursion):
    _assert_report(normal_form_check(8, recursion))


def test_normal_form_structure(recursion):
    nf = normal_form_h1(6, recursion)
    assert sorted(nf.standard) == [1, 2, 3]
    assert nf.transformation[0] == recursion.ring.v(0)


def test_report_records_both_values():
    rep = Report("demo")
    assert not rep.ok  # empty reports are not a pass
    rep.add("equal", 1, 1)
    rep.add("different", 1, 2)
    assert [i.ok for i in rep.items] == [True, False]
    assert (rep.items[1].got, rep.items[1].want) == ("1", "2")
    assert not rep.ok
