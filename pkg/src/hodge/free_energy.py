"""Free energies F_g of the point.

F_1 and F_2 are closed forms.  For g >= 3, F_g is reconstructed by fitting a
monomial ansatz against psi-class intersection numbers computed by an
independent recursion (string, dilaton, DVV).
"""
from __future__ import annotations

import hashlib
import itertools
from dataclasses import dataclass, field
from functools import lru_cache
from math import comb, factorial

from gmpy2 import mpq

from . import linalg
from .jetring import DiffPoly, JetRing, canonical_text, convert, degbar
from .tseries import TSpace, eval_on_tseries, topological_jets


class FitError(RuntimeError):
    pass


# ---------------------------------------------------------------------------
# Bernoulli numbers
# ---------------------------------------------------------------------------

@lru_cache(maxsize=None)
def _bernoulli_table(n: int) -> tuple:
    B = [mpq(1)]
    for m in range(1, n + 1):
        s = mpq(0)
        for j in range(m):
            s += comb(m + 1, j) * B[j]
        B.append(-s / (m + 1))
    return tuple(B)


def bernoulli(n: int) -> mpq:
    """B_n with B_1 = -1/2."""
    if n < 0:
        raise ValueError("n must be nonnegative")
    return _bernoulli_table(n)[n]


# ---------------------------------------------------------------------------
# psi-class intersection numbers
# ---------------------------------------------------------------------------

def _dfact(n: int) -> int:
    r = 1
    while n > 1:
        r *= n
        n -= 2
    return r


class IntersectionOracle:
    """<tau_{k_1} ... tau_{k_n}>_g via string, dilaton and the DVV recursion."""

    def __init__(self, store: dict | None = None):
        self.memo: dict[tuple, mpq] = {}
        self.store = store  # optional persistent "g:[k...]" -> "p/q"
        if store:
            for key, val in store.items():
                g, ks = key.split(":", 1)
                ks = tuple(int(x) for x in ks.strip("[]").split(",") if x.strip())
                self.memo[(int(g), ks)] = mpq(val)

    def __call__(self, g: int, exps) -> mpq:
        ks = tuple(sorted(exps))
        if any(k < 0 for k in ks):
            raise ValueError("negative psi exponent")
        return self._value(g, ks)

    def _value(self, g: int, ks: tuple) -> mpq:
        n = len(ks)
        if g < 0 or 2 * g - 2 + n <= 0 or sum(ks) != 3 * g - 3 + n:
            return mpq(0)
        key = (g, ks)
        r = self.memo.get(key)
        if r is not None:
            return r
        if g == 0 and ks == (0, 0, 0):
            r = mpq(1)
        elif g == 1 and ks == (1,):
            r = mpq(1, 24)
        elif ks[0] == 0:
            rest = ks[1:]
            r = mpq(0)
            for j, k in enumerate(rest):
                if k:
                    r += self._value(g, tuple(sorted(rest[:j] + (k - 1,) + rest[j + 1:])))
        elif ks[0] == 1:
            r = (2 * g - 2 + n - 1) * self._value(g, ks[1:])
        else:
            r = self._dvv(g, ks)
        self.memo[key] = r
        if self.store is not None:
            self.store[f"{g}:[{','.join(map(str, ks))}]"] = f"{r.numerator}/{r.denominator}"
        return r

    def _dvv(self, g: int, ks: tuple) -> mpq:
        # pick the largest exponent as k+1
        k = ks[-1] - 1
        rest = ks[:-1]
        total = mpq(0)
        for j, d in enumerate(rest):
            others = rest[:j] + rest[j + 1:]
            total += mpq(_dfact(2 * k + 2 * d + 1), _dfact(2 * d - 1)) * self._value(g, tuple(sorted(others + (d + k,))))
        half = mpq(1, 2)
        for a in range(k):
            b = k - 1 - a
            w = _dfact(2 * a + 1) * _dfact(2 * b + 1)
            total += half * w * self._value(g - 1, tuple(sorted(rest + (a, b))))
            idx = range(len(rest))
            for r_ in range(len(rest) + 1):
                for I in itertools.combinations(idx, r_):
                    I_set = set(I)
                    left = tuple(rest[i] for i in I)
                    right = tuple(rest[i] for i in idx if i not in I_set)
                    for g1 in range(g + 1):
                        x = self._value(g1, tuple(sorted(left + (a,))))
                        if not x:
                            continue
                        y = self._value(g - g1, tuple(sorted(right + (b,))))
                        if y:
                            total += half * w * x * y
        return total / _dfact(2 * k + 3)


# ---------------------------------------------------------------------------
# free energies
# ---------------------------------------------------------------------------

@dataclass
class FreeEnergy:
    genus: int
    poly: DiffPoly
    provenance: str  # "closed-form" or "fitted"
    fit: dict = field(default_factory=dict)

    def digest(self) -> str:
        return hashlib.sha256(canonical_text(self.poly).encode()).hexdigest()[:16]


def default_ring(max_s: int = 5) -> JetRing:
    return JetRing([f"s{k}" for k in range(1, max_s + 1)])


def f1(ring: JetRing) -> DiffPoly:
    return ring.L().scale(mpq(1, 24))


def f2(ring: JetRing) -> DiffPoly:
    m = ring.monomial
    return (m(mpq(1, 1152), v1=-2, jets={4: 1})
            + m(mpq(-7, 1920), v1=-3, jets={2: 1, 3: 1})
            + m(mpq(1, 360), v1=-4, jets={2: 3}))


def ansatz_monomials(g: int) -> list[dict]:
    """Jet multisets {j: alpha_j} (j >= 2) with sum (j-1) alpha_j <= 3g-3."""
    W = 3 * g - 3
    top = 3 * g - 2
    out = []

    def rec(j: int, budget: int, cur: dict):
        if j > top:
            out.append(dict(cur))
            return
        for a in range(0, budget // (j - 1) + 1):
            if a:
                cur[j] = a
            rec(j + 1, budget - a * (j - 1), cur)
            cur.pop(j, None)

    rec(2, W, {})
    out.sort(key=lambda m: (sum((j - 1) * a for j, a in m.items()), sorted(m.items())))
    return out


def _partitions_weight(W: int, top: int):
    """Multisets of t-indices in [2, top] with total weight exactly W (weight p-1)."""
    def rec(maxp: int, rem: int):
        if rem == 0:
            yield ()
            return
        for p in range(min(maxp, rem + 1), 1, -1):
            for rest in rec(p, rem - (p - 1)):
                yield (p,) + rest
    return list(rec(top, W))


def fit_degree(g: int, n_unknowns: int) -> int:
    W = 3 * g - 3
    parts = _partitions_weight(W, 3 * g - 2)
    D = W
    while True:
        count = sum(max(0, D - len(p) + 1) for p in parts)
        if count * 2 > 3 * n_unknowns:
            return D
        D += 1


def fit_free_energy(g: int, ring: JetRing | None = None, oracle: IntersectionOracle | None = None) -> FreeEnergy:
    """Reconstruct F_g from intersection numbers (works for any g >= 2)."""
    if g < 2:
        raise ValueError("fitting needs g >= 2")
    ring = ring or default_ring()
    oracle = oracle or IntersectionOracle()
    W = 3 * g - 3
    top = 3 * g - 2
    monos = ansatz_monomials(g)
    n = len(monos)
    D = fit_degree(g, n)
    space = TSpace(range(1, top + 1), D, weight_cap=W)
    jets = topological_jets(space, top)
    cache: dict = {}
    columns = []
    polys = []
    for mono in monos:
        e1 = 2 * g - 2 - sum(j * a for j, a in mono.items())
        p = ring.monomial(1, v1=e1, jets=mono)
        polys.append(p)
        columns.append(eval_on_tseries(p, jets, cache=cache))
    # every admissible t-monomial is an equation
    eq_keys = []
    for w in range(W + 1):
        for part in _partitions_weight(w, top):
            for j in range(0, D - len(part) + 1):
                e = {}
                for p in part:
                    e[p] = e.get(p, 0) + 1
                if j:
                    e[1] = j
                eq_keys.append(space.key(e))
    rows = []
    rhs = []
    admissible = 0
    for key in eq_keys:
        row = {}
        for ci, col in enumerate(columns):
            c = col.terms.get(key)
            if c:
                row[ci] = c
        e = space.exps(key)
        ks = []
        denom = 1
        for p, mult in e.items():
            ks += [p] * mult
            denom *= factorial(mult)
        target = oracle(g, ks) / denom if sum(e.values()) and space.meta(key)[1] == W else mpq(0)
        if space.meta(key)[1] == W:
            admissible += 1
        rows.append(row)
        rhs.append(target)
    # columns may carry keys outside eq_keys only if enumeration is wrong
    keyset = set(eq_keys)
    for col in columns:
        stray = [k for k in col.terms if k not in keyset]
        if stray:
            raise FitError(f"series term outside the equation set: {space.exps(stray[0])}")
    try:
        sol = linalg.solve(rows, rhs, n)
    except linalg.InconsistentSystem as err:
        raise FitError(f"genus {g}: fit has nonzero residual at equation {err.row} "
                       f"(t-monomial {space.exps(eq_keys[err.row])}, residual {err.residual})") from None
    except linalg.RankDeficient as err:
        raise FitError(f"genus {g}: ansatz underdetermined, free monomials {[monos[i] for i in err.free]}") from None
    poly = ring.zero()
    for c, p in zip(sol, polys):
        if c:
            poly = poly + p.scale(c)
    if not admissible * 2 > 3 * n:
        raise FitError("fit is not overdetermined enough")
    fit = {"unknowns": n, "equations": len(rows), "admissible_equations": admissible, "degree": D,
           "rank": n, "residual": 0}
    return FreeEnergy(g, poly, "fitted", fit)


_FE_CACHE: dict = {}


def free_energy(g: int, ring: JetRing | None = None, *, refit: bool = False, oracle: IntersectionOracle | None = None,
                store=None) -> FreeEnergy:
    """F_g in ``ring``. g = 1, 2 closed form; g >= 3 fitted (memoized, optional disk store)."""
    ring = ring or default_ring()
    if g < 1:
        raise ValueError("genus must be >= 1")
    if g == 1:
        return FreeEnergy(1, f1(ring), "closed-form")
    if g == 2 and not refit:
        return FreeEnergy(2, f2(ring), "closed-form")
    key = (g, ring)
    if not refit and key in _FE_CACHE:
        return _FE_CACHE[key]
    fe = None
    if store is not None and not refit:
        fe = store.load_free_energy(g, ring)
    if fe is None:
        fe = fit_free_energy(g, ring, oracle)
        check_free_energy(fe)
        if store is not None:
            store.save_free_energy(fe)
    _FE_CACHE[key] = fe
    return fe


def check_free_energy(fe: FreeEnergy) -> None:
    """Structural laws: deg 2g-2, degbar <= 3g-3, no v, no parameters, jets <= 3g-2."""
    g, p = fe.genus, fe.poly
    r = p.ring
    if g < 2:
        return
    if p.deg() != {2 * g - 2}:
        raise FitError(f"F_{g} not homogeneous of degree {2 * g - 2}: {sorted(p.deg())}")
    if degbar(p) > 3 * g - 3:
        raise FitError(f"F_{g} degbar {degbar(p)} exceeds {3 * g - 3}")
    if p.max_jet() > 3 * g - 2:
        raise FitError(f"F_{g} uses jets beyond v{3 * g - 2}")
    for k in p.terms:
        d = r.decode(k)
        if d[r.i_v] or d[r.i_L] or d[r.i_X] or any(d[: r.K]):
            raise FitError(f"F_{g} has a forbidden factor in {r.factor_strings(k)}")
