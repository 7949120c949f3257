from __future__ import annotations

import pytest
from conftest import diffpolys
from gmpy2 import mpq
from hypothesis import given

from hodge.jetring import (EpsExpansion, JetRing, ParseError, RingError, canonical_text, convert, degbar, dx,
                           dx_n, from_json, parse, pdiff, subs_params, taylor_compose, to_json)

R = JetRing(["s1", "s2"])
RX = JetRing(["s"], use_X=True, mu={(1,): 2})


@given(diffpolys(R), diffpolys(R), diffpolys(R))
def test_ring_axioms(a, b, c):
    assert (a * b) * c == a * (b * c)
    assert a * (b + c) == a * b + a * c
    assert a * b == b * a
    assert a - a == R.zero()


@given(diffpolys(R), diffpolys(R))
def test_leibniz(a, b):
    assert dx(a * b) == dx(a) * b + a * dx(b)


@given(diffpolys(RX), diffpolys(RX))
def test_leibniz_with_exponential(a, b):
    assert dx(a * b) == dx(a) * b + a * dx(b)


@given(diffpolys(R))
def test_pdiff_dx_commutator(a):
    for m in range(0, 6):
        lower = pdiff(a, m - 1) if m else R.zero()
        assert pdiff(dx(a), m) == dx(pdiff(a, m)) + lower


@given(diffpolys(R))
def test_text_and_json_round_trip(a):
    assert parse(canonical_text(a), R) == a
    assert from_json(to_json(a), R) == a


@given(diffpolys(RX))
def test_text_round_trip_with_exponential(a):
    assert parse(canonical_text(a), RX) == a


def test_basic_derivatives():
    v = R.v
    assert dx(v(0)) == v(1)
    assert dx(R.L()) == v(2) * R.monomial(v1=-1)
    assert dx(v(1, -1)) == -(v(2) * R.monomial(v1=-2))
    assert dx_n(v(0), 4) == v(4)
    assert pdiff(v(2, 3) * v(0), 2) == (v(2, 2) * v(0)).scale(3)


def test_exponential_derivative():
    X = RX.monomial(X=1)
    assert dx(X) == (RX.param("s") * RX.v(1) * X).scale(2)


def test_degrees():
    p = R.v(2, 2) * R.monomial(v1=-2) + R.v(3) * R.monomial(v1=-1)
    assert p.deg() == {2}
    assert degbar(p) == 2
    assert degbar(R.v(5) * R.v(2)) == 5
    assert (R.param("s1") * R.v(1, 2)).deg() == {2}
    assert R.L().deg() == {0}


def test_canonical_text_format():
    p = parse("-(1/48)*s2*v1^2 + (7/40)*s1^2*v2", R)
    assert canonical_text(p) == "-(1/48)*s2*v1^2 + (7/40)*s1^2*v2"
    assert canonical_text(R.zero()) == "0"
    assert parse("L", R) == R.L()


def test_parse_errors():
    with pytest.raises(ParseError):
        parse("v1 $ v2", R)
    with pytest.raises((ParseError, RingError, ValueError)):
        parse("q7", R)


def test_bad_rings():
    with pytest.raises(RingError):
        JetRing(["v3"])
    with pytest.raises(RingError):
        JetRing(["a", "a"])
    with pytest.raises(RingError):
        JetRing(["s"], use_X=True)


def test_convert_and_substitute():
    src = JetRing(["s1"])
    p = parse("(2)*s1*v2 + (1)*v1^2", src)
    q = convert(p, R)
    assert canonical_text(q) == canonical_text(p)
    t = JetRing(["e"])
    img = {"s1": t.param("e").scale(3)}
    assert subs_params(p, t, img) == parse("(6)*e*v2 + (1)*v1^2", t)


def test_eps_expansion_arithmetic():
    a = EpsExpansion(R, {0: R.v(0), 2: R.v(2)}, 4)
    b = EpsExpansion(R, {0: R.one(), 2: R.v(1)}, 4)
    ab = a * b
    assert ab[0] == R.v(0)
    assert ab[2] == R.v(2) + R.v(0) * R.v(1)
    assert ab[4] == R.v(2) * R.v(1)
    assert (a - a).is_zero()
    assert a.dx()[2] == R.v(3)


def test_taylor_compose_matches_direct_substitution():
    # f(v + eps^2 v2) for f = v^3 via Taylor vs direct product
    f = R.v(0, 3)
    delta = EpsExpansion(R, {2: R.v(2)}, 6)

    def shift(m):
        d = delta
        for _ in range(m):
            d = d.dx()
        return d

    got = taylor_compose(f, shift, 6)
    w = EpsExpansion(R, {0: R.v(0)}, 6) + delta
    assert got == w * w * w
