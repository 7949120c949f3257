"""Truncated multivariate power series in times t_p, and the topological solution."""
from __future__ import annotations

from math import factorial
from typing import Iterable, Mapping

from gmpy2 import mpq

from .jetring import DiffPoly, RingError

TBITS = 8
TMASK = (1 << TBITS) - 1


class TSpace:
    """Variables t_p (p in ``times``), total-degree cap D, optional weight cap.

    The weight of t_p is p - 1.  A weight cap is only allowed when every
    variable has nonnegative weight, so truncating by weight is consistent.
    """

    def __init__(self, times: Iterable[int], D: int, weight_cap: int | None = None):
        self.times = tuple(sorted(set(times)))
        if D > TMASK:
            raise ValueError("degree cap too large")
        self.D = D
        self.weights = tuple(p - 1 for p in self.times)
        if weight_cap is not None and any(w < 0 for w in self.weights):
            raise ValueError("weight cap needs nonnegative weights (exclude t_0)")
        self.weight_cap = weight_cap
        self.index = {p: i for i, p in enumerate(self.times)}
        self._meta: dict[int, tuple] = {}

    def __eq__(self, other):
        return isinstance(other, TSpace) and (self.times, self.D, self.weight_cap) == (other.times, other.D, other.weight_cap)

    def __hash__(self):
        return hash((self.times, self.D, self.weight_cap))

    def key(self, exps: Mapping[int, int]) -> int:
        k = 0
        for p, e in exps.items():
            if e:
                k += e << (TBITS * self.index[p])
        return k

    def exps(self, key: int) -> dict:
        out = {}
        for i, p in enumerate(self.times):
            e = (key >> (TBITS * i)) & TMASK
            if e:
                out[p] = e
        return out

    def meta(self, key: int) -> tuple:
        m = self._meta.get(key)
        if m is None:
            d = w = 0
            for i, wt in enumerate(self.weights):
                e = (key >> (TBITS * i)) & TMASK
                d += e
                w += e * wt
            m = (d, w)
            self._meta[key] = m
        return m

    def admissible(self, key: int) -> bool:
        d, w = self.meta(key)
        return d <= self.D and (self.weight_cap is None or w <= self.weight_cap)

    # constructors
    def const(self, c) -> "TSeries":
        c = mpq(c)
        return TSeries(self, {0: c} if c else {})

    def var(self, p: int) -> "TSeries":
        if p not in self.index:
            return TSeries(self, {})
        k = 1 << (TBITS * self.index[p])
        return TSeries(self, {k: mpq(1)} if self.admissible(k) else {})


class TSeries:
    __slots__ = ("space", "terms", "_bydeg")

    def __init__(self, space: TSpace, terms: dict):
        self.space = space
        self.terms = terms
        self._bydeg = None

    def __eq__(self, other):
        if isinstance(other, TSeries):
            return self.space == other.space and self.terms == other.terms
        return NotImplemented

    __hash__ = None

    def __repr__(self):
        return f"TSeries({len(self.terms)} terms)"

    def coeff(self, exps: Mapping[int, int]):
        if any(p not in self.space.index for p, e in exps.items() if e):
            return mpq(0)
        return self.terms.get(self.space.key(exps), mpq(0))

    def constant(self):
        return self.terms.get(0, mpq(0))

    def __add__(self, other):
        if not isinstance(other, TSeries):
            other = self.space.const(other)
        res = dict(self.terms)
        for k, c in other.terms.items():
            s = res.get(k)
            if s is None:
                res[k] = c
            else:
                s += c
                if s:
                    res[k] = s
                else:
                    del res[k]
        return TSeries(self.space, res)

    __radd__ = __add__

    def __neg__(self):
        return TSeries(self.space, {k: -c for k, c in self.terms.items()})

    def __sub__(self, other):
        if not isinstance(other, TSeries):
            other = self.space.const(other)
        return self + (-other)

    def scale(self, c):
        c = mpq(c)
        if not c:
            return TSeries(self.space, {})
        return TSeries(self.space, {k: v * c for k, v in self.terms.items()})

    def _by_degree(self):
        if self._bydeg is None:
            sp = self.space
            buckets: dict[int, list] = {}
            for k, c in self.terms.items():
                buckets.setdefault(sp.meta(k)[0], []).append((k, c))
            self._bydeg = sorted(buckets.items())
        return self._bydeg

    def __mul__(self, other):
        if not isinstance(other, TSeries):
            return self.scale(other)
        sp = self.space
        D = sp.D
        cap = sp.weight_cap
        meta = sp.meta
        res: dict = {}
        get = res.get
        bdeg = other._by_degree()
        for k1, c1 in self.terms.items():
            d1, w1 = meta(k1)
            for d2, items in bdeg:
                if d1 + d2 > D:
                    break
                for k2, c2 in items:
                    k = k1 + k2
                    if cap is not None and w1 + meta(k2)[1] > cap:
                        continue
                    s = get(k)
                    res[k] = c1 * c2 if s is None else s + c1 * c2
        return TSeries(sp, {k: c for k, c in res.items() if c})

    __rmul__ = __mul__

    def __pow__(self, n: int):
        if n < 0:
            return self.inverse() ** (-n)
        out = self.space.const(1)
        base = self
        while n:
            if n & 1:
                out = out * base
            n >>= 1
            if n:
                base = base * base
        return out

    def inverse(self) -> "TSeries":
        c0 = self.constant()
        if not c0:
            raise RingError("series with zero constant term is not invertible")
        g = (self - self.space.const(c0)).scale(-1 / c0)
        acc = self.space.const(1)
        term = self.space.const(1)
        for _ in range(self.space.D):
            term = term * g
            if not term.terms:
                break
            acc = acc + term
        return acc.scale(1 / c0)

    def log(self) -> "TSeries":
        c0 = self.constant()
        if c0 != 1:
            raise RingError("log needs constant term 1")
        g = self - self.space.const(1)
        acc = TSeries(self.space, {})
        term = self.space.const(1)
        for n in range(1, self.space.D + 1):
            term = term * g
            if not term.terms:
                break
            acc = acc + term.scale(mpq((-1) ** (n + 1), n))
        return acc

    def exp(self) -> "TSeries":
        c0 = self.constant()
        if c0:
            raise RingError("exp needs zero constant term")
        acc = self.space.const(1)
        term = self.space.const(1)
        for n in range(1, self.space.D + 1):
            term = (term * self).scale(mpq(1, n))
            if not term.terms:
                break
            acc = acc + term
        return acc


def topological_jets(space: TSpace, max_jet: int) -> dict[int, TSeries]:
    """Jets v, v_1, ..., v_max_jet of the topological solution.

    With A(z) = sum_p t_p z^p / p! (t_p over the space's variables):
      v   = sum_k (1/k) [z^(k-1)] A^k
      v_m = sum_{k>=0} (k+1)...(k+m-1) [z^(k+m-1)] A^k     (m >= 1)
    """
    D = space.D
    zmax = D + max_jet
    A = {}
    for p in space.times:
        A[p] = space.var(p).scale(mpq(1, factorial(p)))
    powers = [{0: space.const(1)}]
    for k in range(1, D + 1):
        prev = powers[-1]
        cur: dict[int, TSeries] = {}
        for z1, s1 in prev.items():
            for z2, s2 in A.items():
                z = z1 + z2
                if z > zmax:
                    continue
                prod = s1 * s2
                if prod.terms:
                    cur[z] = cur[z] + prod if z in cur else prod
        powers.append({z: s for z, s in cur.items() if s.terms})
    zero = TSeries(space, {})
    jets: dict[int, TSeries] = {}
    v = zero
    for k in range(1, D + 1):
        c = powers[k].get(k - 1)
        if c is not None:
            v = v + c.scale(mpq(1, k))
    jets[0] = v
    for m in range(1, max_jet + 1):
        acc = zero
        for k in range(0, D + 1):
            c = powers[k].get(k + m - 1)
            if c is None:
                continue
            f = 1
            for j in range(k + 1, k + m):
                f *= j
            acc = acc + c.scale(f)
        jets[m] = acc
    return jets


def eval_on_tseries(a: DiffPoly, jets: Mapping[int, TSeries], s_values: Mapping[str, object] | None = None,
                    *, cache: dict | None = None) -> TSeries:
    """Substitute jet series into ``a``; parameters take rational values.

    L is evaluated as log(jets[1]), X as exp(mu * jets[0]).  ``cache`` may be
    shared across calls with the same jets to reuse powers.
    """
    r = a.ring
    space = jets[1].space
    s_values = dict(s_values or {})
    if cache is None:
        cache = {}
    pvals = []
    for name in r.params:
        pvals.append(mpq(s_values[name]) if name in s_values else None)

    def power(field: int, e: int) -> TSeries:
        key = (field, e)
        p = cache.get(key)
        if p is not None:
            return p
        if e == 1 or e == -1:
            p = _base(field, e)
        elif e > 0:
            p = power(field, e - 1) * _base(field, 1)
        else:
            p = power(field, e + 1) * _base(field, -1)
        cache[key] = p
        return p

    def _base(field: int, sign: int) -> TSeries:
        key = ("base", field, sign)
        b = cache.get(key)
        if b is not None:
            return b
        if field == r.i_v1:
            b = jets[1] if sign > 0 else jets[1].inverse()
        elif field == r.i_v:
            b = jets[0]
        elif field == r.i_L:
            b = jets[1].log()
        elif field == r.i_X:
            mu = mpq(0)
            for exps, c in r.mu:
                t = c
                for i, e in enumerate(exps):
                    if e:
                        if pvals[i] is None:
                            raise RingError(f"no value for parameter {r.params[i]!r}")
                        t *= pvals[i] ** e
                mu += t
            b = jets[0].scale(mu).exp()
        else:
            m = field - r.K - 2
            if m not in jets:
                raise RingError(f"no series for jet v{m}")
            b = jets[m]
        cache[key] = b
        return b

    if jets[1].constant() == 0 and any(r.decode(k)[r.i_v1] < 0 or r.decode(k)[r.i_L] for k in a.terms):
        raise RingError("v1 series is not invertible")
    out: dict = {}
    for k, c in a.terms.items():
        d = r.decode(k)
        coef = c
        for i in range(r.K):
            if d[i]:
                if pvals[i] is None:
                    raise RingError(f"no value for parameter {r.params[i]!r}")
                coef *= pvals[i] ** d[i]
        if not coef:
            continue
        prod = None
        for f in range(r.K, r.nfields):
            e = d[f]
            if e:
                pw = power(f, e)
                prod = pw if prod is None else prod * pw
                if not prod.terms:
                    break
        if prod is None:
            prod = space.const(1)
        for kk, cc in prod.terms.items():
            s = out.get(kk, 0) + coef * cc
            if s:
                out[kk] = s
            else:
                out.pop(kk, None)
    return TSeries(space, out)
