"""Structure functions of the one-dimensional Frobenius manifold F = v^3/6,
the t-derivatives of the principal hierarchy, and the operators D_k."""
from __future__ import annotations

from math import factorial

from gmpy2 import mpq

from .jetring import DiffPoly, JetRing, dx, pdiff

_flow_cache: dict = {}
_bell_cache: dict = {}
_dk_cache: dict = {}


def theta(ring: JetRing, p: int) -> DiffPoly:
    """theta_p = v^(p+1)/(p+1)!"""
    return ring.v(0, p + 1).scale(mpq(1, factorial(p + 1))) if p + 1 else ring.one()


def omega(ring: JetRing, p: int, q: int) -> DiffPoly:
    """Omega_{p,q} = v^(p+q+1) / ((p+q+1) p! q!)"""
    n = p + q + 1
    return ring.v(0, n).scale(mpq(1, n * factorial(p) * factorial(q)))


def tr_u(ring: JetRing) -> DiffPoly:
    return ring.v(0)


def velocity(ring: JetRing, p: int, ell: int) -> DiffPoly:
    """dx^ell of dv/dt_p = v^p v_1 / p!."""
    key = (ring, p, ell)
    r = _flow_cache.get(key)
    if r is None:
        if ell == 0:
            r = ring.v(0, p) * ring.v(1) if p else ring.v(1)
            r = r.scale(mpq(1, factorial(p)))
        else:
            r = dx(velocity(ring, p, ell - 1))
        _flow_cache[key] = r
    return r


def flow_tderiv(f: DiffPoly, p: int) -> DiffPoly:
    """d f / d t_p along the principal hierarchy (chain rule over jets)."""
    ring = f.ring
    if p == 0:
        return dx(f)
    top = f.max_jet()
    out = ring.zero()
    for ell in range(0, top + 1):
        g = pdiff(f, ell)
        if g.terms:
            out = out + g * velocity(ring, p, ell)
    return out


def _bell(ring: JetRing, l: int) -> list:
    """Coefficients in z of P_l with dx^l(e^{zv}) = e^{zv} P_l(z)."""
    key = (ring, l)
    r = _bell_cache.get(key)
    if r is None:
        if l == 0:
            r = [ring.one()]
        else:
            prev = _bell(ring, l - 1)
            v1 = ring.v(1)
            r = [ring.zero() for _ in range(l + 1)]
            for j, c in enumerate(prev):
                r[j] = r[j] + dx(c)
                r[j + 1] = r[j + 1] + c * v1
        _bell_cache[key] = r
    return r


def alt_sum(ring: JetRing, l: int, m: int, N: int) -> DiffPoly:
    """sum_p (-1)^p dx^l(v^p/p!) dx^m(v^(N-p)/(N-p)!) = [z^N] P_l(-z) P_m(z)."""
    if N > l + m:
        return ring.zero()
    a, b = _bell(ring, l), _bell(ring, m)
    out = ring.zero()
    for i in range(max(0, N - m), min(l, N) + 1):
        term = a[i] * b[N - i]
        out = out + (term if i % 2 == 0 else -term)
    return out


def dk_on_jet(ring: JetRing, k: int, m: int) -> DiffPoly:
    """D_k(v^(m)): zero below m = 2k, else dx(D_k v^(m-1)) - alt_sum(0, m, 2k)."""
    key = (ring, k, m)
    r = _dk_cache.get(key)
    if r is None:
        if m < 2 * k:
            r = ring.zero()
        else:
            r = dx(dk_on_jet(ring, k, m - 1)) - alt_sum(ring, 0, m, 2 * k)
        _dk_cache[key] = r
    return r


def dk_apply(k: int, f: DiffPoly) -> DiffPoly:
    ring = f.ring
    out = ring.zero()
    for m in range(2 * k, f.max_jet() + 1):
        g = pdiff(f, m)
        if g.terms:
            out = out + g * dk_on_jet(ring, k, m)
    return out


def second_tderiv_altsum(f: DiffPoly, N: int) -> DiffPoly:
    """sum_{p=0}^N (-1)^p d^2 f / dt_p dt_{N-p}."""
    out = f.ring.zero()
    firsts = {}
    for p in range(N + 1):
        q = N - p
        a, b = (p, q) if p <= q else (q, p)
        if a not in firsts:
            firsts[a] = flow_tderiv(f, a)
        term = flow_tderiv(firsts[a], b)
        out = out + (term if p % 2 == 0 else -term)
    return out


def pair_tderiv_altsum(f1: DiffPoly, f2: DiffPoly, N: int) -> DiffPoly:
    """sum_{p=0}^N (-1)^p (df1/dt_p)(df2/dt_{N-p})."""
    out = f1.ring.zero()
    d1 = [flow_tderiv(f1, p) for p in range(N + 1)]
    d2 = d1 if f2 is f1 else [flow_tderiv(f2, p) for p in range(N + 1)]
    for p in range(N + 1):
        term = d1[p] * d2[N - p]
        out = out + (term if p % 2 == 0 else -term)
    return out


def clear_caches() -> None:
    _flow_cache.clear()
    _bell_cache.clear()
    _dk_cache.clear()
