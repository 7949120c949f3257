"""From s-parameter Hodge potentials to lambda-class generating functions.

With sigma_{2k-1} defined by s_k = -B_{2k}/(2k)! sigma_{2k-1}, the potential
H_g(s) equals sum_M c_M(sigma) H_g(M) where exp(sum sigma_{2k-1} ch_{2k-1}) =
sum_M c_M(sigma) M in the Mumford-reduced lambda basis.  The H_g(M) are solved
for from the (overdetermined) coefficient system.
"""
from __future__ import annotations

import itertools
from collections import Counter
from math import factorial

from gmpy2 import mpq

from . import linalg
from .free_energy import bernoulli
from .hodge_recursion import HodgeRecursion
from .jetring import DiffPoly, JetRing, canonical_text, subs_params
from .tseries import TSpace, eval_on_tseries, topological_jets


class ExtractionError(RuntimeError):
    pass


# ---------------------------------------------------------------------------
# lambda polynomials
# ---------------------------------------------------------------------------

class LambdaPoly:
    """Sparse polynomial in lambda_1..lambda_g; keys are sorted index tuples."""

    __slots__ = ("g", "terms")

    def __init__(self, g: int, terms: dict | None = None):
        self.g = g
        self.terms = {k: mpq(c) for k, c in (terms or {}).items() if c}

    @classmethod
    def monomial(cls, g: int, idx, coeff=1) -> "LambdaPoly":
        idx = tuple(sorted(i for i in idx if i != 0))
        if any(i > g or i < 0 for i in idx):
            return cls(g)
        return cls(g, {idx: mpq(coeff)})

    def __eq__(self, other):
        return isinstance(other, LambdaPoly) and self.g == other.g and self.terms == other.terms

    __hash__ = None

    def __add__(self, other):
        out = dict(self.terms)
        for k, c in other.terms.items():
            out[k] = out.get(k, 0) + c
        return LambdaPoly(self.g, out)

    def scale(self, c):
        return LambdaPoly(self.g, {k: v * c for k, v in self.terms.items()})

    def __mul__(self, other):
        if not isinstance(other, LambdaPoly):
            return self.scale(mpq(other))
        out: dict = {}
        for k1, c1 in self.terms.items():
            for k2, c2 in other.terms.items():
                k = tuple(sorted(k1 + k2))
                out[k] = out.get(k, 0) + c1 * c2
        return LambdaPoly(self.g, out)

    def is_reduced(self) -> bool:
        return all(len(set(k)) == len(k) for k in self.terms)

    def __repr__(self):
        return f"LambdaPoly(g={self.g}, {lambda_text(self)})"


def lambda_text(p: LambdaPoly) -> str:
    if not p.terms:
        return "0"
    parts = []
    for k, c in sorted(p.terms.items()):
        mono = "*".join(f"l{i}" for i in k) or "1"
        parts.append(f"({c})*{mono}")
    return " + ".join(parts)


def _mumford_rule(g: int, k: int) -> list:
    """lambda_k^2 = -2 sum_{i<k} (-1)^(k-i) lambda_i lambda_{2k-i}; returns [(coeff, idx tuple)]."""
    out = []
    for i in range(0, k):
        j = 2 * k - i
        if j > g:
            continue
        out.append((mpq(-2 * (-1) ** (k - i)), tuple(x for x in (i, j) if x)))
    return out


def mumford_reduce(p: LambdaPoly, *, order: str = "largest") -> LambdaPoly:
    """Rewrite repeated indices away. ``order`` picks which repeated index to
    rewrite first ("largest", "smallest" or "random:<seed>")."""
    import random

    rng = random.Random(int(order.split(":")[1])) if order.startswith("random") else None
    g = p.g
    done: dict = {}
    todo = dict(p.terms)
    while todo:
        k, c = todo.popitem()
        if not c:
            continue
        if any(i > g for i in k):
            continue
        cnt = Counter(k)
        reps = sorted(i for i, m in cnt.items() if m >= 2)
        if not reps:
            done[k] = done.get(k, 0) + c
            continue
        if rng is not None:
            r = rng.choice(reps)
        else:
            r = reps[-1] if order == "largest" else reps[0]
        rest = list(k)
        rest.remove(r)
        rest.remove(r)
        for cc, add in _mumford_rule(g, r):
            nk = tuple(sorted(rest + list(add)))
            todo[nk] = todo.get(nk, 0) + c * cc
    return LambdaPoly(g, done)


def ch_in_lambda(g: int, m: int) -> LambdaPoly:
    """ch_m = p_m/m! with power sums from Newton's identities (e_i = lambda_i), reduced."""
    if m % 2 == 0 or m < 1:
        raise ValueError("only odd Chern characters are used")
    return _ch_cache(g, m)


_CH: dict = {}


def _power_sums(g: int, m: int) -> list:
    ps = [None]
    for n in range(1, m + 1):
        acc = LambdaPoly.monomial(g, (n,), (-1) ** (n - 1) * n) if n <= g else LambdaPoly(g)
        for i in range(1, min(n, g + 1)):
            acc = acc + (LambdaPoly.monomial(g, (i,)) * ps[n - i]).scale((-1) ** (i - 1))
        ps.append(mumford_reduce(acc))
    return ps


def _ch_cache(g: int, m: int) -> LambdaPoly:
    key = (g, m)
    if key not in _CH:
        ps = _power_sums(g, m)
        _CH[key] = ps[m].scale(mpq(1, factorial(m)))
    return _CH[key]


def newton_power_sum_raw(g: int, m: int) -> LambdaPoly:
    """p_m in e_1..e_g before any Mumford reduction (for testing)."""
    ps = [None]
    for n in range(1, m + 1):
        acc = LambdaPoly.monomial(g, (n,), (-1) ** (n - 1) * n) if n <= g else LambdaPoly(g)
        for i in range(1, min(n, g + 1)):
            acc = acc + (LambdaPoly.monomial(g, (i,)) * ps[n - i]).scale((-1) ** (i - 1))
        ps.append(acc)
    return ps[m]


# ---------------------------------------------------------------------------
# extraction
# ---------------------------------------------------------------------------

def weight_bound(g: int) -> int:
    return 1 if g == 1 else 3 * g - 3


def sigma_monomials(g: int) -> list[tuple]:
    """Exponent tuples (a_1, ..., a_g) for sigma_1, sigma_3, ..., sigma_{2g-1} with weight <= bound."""
    W = weight_bound(g)
    out = []
    ranges = [range(0, W // (2 * k - 1) + 1) for k in range(1, g + 1)]
    for a in itertools.product(*ranges):
        if sum(e * (2 * k - 1) for k, e in enumerate(a, start=1)) <= W:
            out.append(a)
    out.sort(key=lambda a: (sum(e * (2 * k - 1) for k, e in enumerate(a, start=1)), a))
    return out


def exp_ch_table(g: int) -> dict:
    """sigma-monomial -> reduced LambdaPoly coefficient of exp(sum sigma ch)."""
    table = {}
    chs = [ch_in_lambda(g, 2 * k - 1) for k in range(1, g + 1)]
    for a in sigma_monomials(g):
        term = LambdaPoly.monomial(g, ())
        for k, e in enumerate(a):
            for _ in range(e):
                term = term * chs[k]
            if e:
                term = term.scale(mpq(1, factorial(e)))
        table[a] = mumford_reduce(term)
    return table


def distinct_monomials(g: int) -> list[tuple]:
    W = weight_bound(g)
    out = []
    for r in range(0, g + 1):
        for c in itertools.combinations(range(1, g + 1), r):
            if sum(c) <= W:
                out.append(c)
    return out


class Extractor:
    def __init__(self, recursion: HodgeRecursion | None = None):
        self.rec = recursion or HodgeRecursion()
        self._gf: dict[int, dict] = {}
        self.diagnostics: dict[int, dict] = {}

    def sigma_ring(self, g: int) -> JetRing:
        r = self.rec.ring
        return JetRing([f"sigma{2 * k - 1}" for k in range(1, g + 1)], max_jet=r.max_jet, use_L=r.use_L)

    def sigma_form(self, g: int) -> DiffPoly:
        """H_g with s_k replaced by -B_{2k}/(2k)! sigma_{2k-1}."""
        H = self.rec.potential(g)
        target = self.sigma_ring(g)
        images = {}
        for k in range(1, len(self.rec.ring.params) + 1):
            name = f"s{k}"
            if name not in self.rec.ring.params:
                continue
            if k <= g:
                c = -bernoulli(2 * k) / factorial(2 * k)
                images[name] = target.param(f"sigma{2 * k - 1}").scale(c)
            else:
                images[name] = target.zero()
        return subs_params(H, target, images)

    def all_gfs(self, g: int) -> dict:
        if g in self._gf:
            return self._gf[g]
        Hs = self.sigma_form(g)
        target = Hs.ring
        parts = Hs.split_params()
        monos = sigma_monomials(g)
        index = {}
        for a in monos:
            index[target.encode(dict(enumerate(a))) - target.one_key] = a
        for pk in parts:
            if pk not in index:
                raise ExtractionError(f"H_{g} has a sigma-monomial beyond the weight bound")
        table = exp_ch_table(g)
        unknowns = distinct_monomials(g)
        col = {M: i for i, M in enumerate(unknowns)}
        rows, rhs = [], []
        for a in monos:
            row = {}
            for M, c in table[a].terms.items():
                if M not in col:
                    raise ExtractionError(f"lambda monomial {M} outside the unknown set")
                row[col[M]] = c
            pk = target.encode(dict(enumerate(a))) - target.one_key
            rows.append(row)
            rhs.append(parts.get(pk, target.zero()))
        try:
            sol = linalg.solve(rows, rhs, len(unknowns), zero=target.zero())
        except linalg.InconsistentSystem as err:
            raise ExtractionError(f"genus {g}: inconsistent at sigma-monomial {monos[err.row]}, "
                                  f"residual {canonical_text(err.residual)}") from None
        except linalg.RankDeficient as err:
            raise ExtractionError(f"genus {g}: undetermined {[unknowns[i] for i in err.free]}") from None
        jet_ring = self.rec.ring
        out = {}
        for M, p in zip(unknowns, sol):
            out[M] = _to_plain(p, jet_ring)
        self._gf[g] = out
        self.diagnostics[g] = {"equations": len(rows), "unknowns": len(unknowns), "residual": 0}
        return out

    def extract_gf(self, g: int, M) -> DiffPoly:
        M = tuple(sorted(M))
        if len(set(M)) != len(M):
            raise ValueError("extract_gf needs distinct indices; use gf_combination for repeated ones")
        gfs = self.all_gfs(g)
        if any(i > g for i in M) or sum(M) > weight_bound(g):
            return self.rec.ring.zero()
        return gfs[M]

    def gf_combination(self, g: int, idx) -> DiffPoly:
        """Generating function for an arbitrary lambda monomial (Mumford-reduced)."""
        red = mumford_reduce(LambdaPoly.monomial(g, idx))
        out = self.rec.ring.zero()
        for M, c in red.terms.items():
            out = out + self.extract_gf(g, M).scale(c)
        return out

    def hodge_number(self, g: int, idx, psi=()) -> mpq:
        idx = tuple(i for i in idx if i)
        psi = tuple(psi)
        if sum(idx) + sum(psi) != 3 * g - 3 + len(psi):
            return mpq(0)
        f = self.gf_combination(g, idx)
        if not psi:
            return value_at_zero(f)
        space = TSpace(set(psi), len(psi))
        jets = topological_jets(space, max(f.max_jet(), 1))
        ser = eval_on_tseries(f, jets)
        mult = Counter(psi)
        c = ser.coeff(dict(mult))
        for m in mult.values():
            c *= factorial(m)
        return c


def _to_plain(p: DiffPoly, ring: JetRing) -> DiffPoly:
    from .jetring import convert

    return convert(p, ring)


def value_at_zero(f: DiffPoly) -> mpq:
    """f at v = 0, v_1 = 1, higher jets 0, L = 0 (no parameters allowed)."""
    r = f.ring
    total = mpq(0)
    for k, c in f.terms.items():
        d = r.decode(k)
        if any(d[:r.K]):
            raise ValueError("value_at_zero needs a parameter-free polynomial")
        if d[r.i_v] or d[r.i_L]:
            continue
        if any(d[i] for i in range(r.K + 4, r.nfields)):
            continue
        total += c  # X -> 1 at v = 0
    return total


def bernoulli_gf(g: int, ring: JetRing) -> DiffPoly:
    """(1/(2(2g-2)!)) (|B_{2g-2}|/(2g-2)) (|B_{2g}|/(2g)) v_1^(2g-2)."""
    c = mpq(1, 2 * factorial(2 * g - 2)) * abs(bernoulli(2 * g - 2)) / (2 * g - 2) * abs(bernoulli(2 * g)) / (2 * g)
    return ring.monomial(c, v1=2 * g - 2)


def bernoulli_formula_check(g: int, extractor: Extractor | None = None) -> tuple[bool, DiffPoly, DiffPoly]:
    ex = extractor or Extractor()
    got = ex.extract_gf(g, tuple(i for i in (g - 2, g - 1, g) if i))
    want = bernoulli_gf(g, got.ring)
    return got == want, got, want
