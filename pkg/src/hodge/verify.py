"""Property suites shared by the test-suite and the ``verify`` command.

Every check yields a Check(suite, name, ok, detail).  Randomized checks take an
explicit seed so a failure can be replayed.
"""
from __future__ import annotations

import random
from dataclasses import dataclass
from math import factorial
from typing import Callable, Iterator

from gmpy2 import mpq

from .free_energy import check_free_energy, default_ring
from .hierarchy import Hierarchy, skew_defect, variational_derivative
from .hodge_recursion import HodgeRecursion, check_table
from .jetring import DiffPoly, JetRing, canonical_text, degbar, dx, dx_n, parse, pdiff
from .lambda_extract import Extractor, LambdaPoly, mumford_reduce
from .point_frobenius import alt_sum, dk_on_jet, flow_tderiv, omega, tr_u
from .tseries import TSpace, eval_on_tseries, topological_jets


@dataclass
class Check:
    suite: str
    name: str
    ok: bool
    detail: str = ""


# ---------------------------------------------------------------------------
# random elements
# ---------------------------------------------------------------------------

def random_rational(rng: random.Random) -> mpq:
    return mpq(rng.randint(-9, 9) or 1, rng.randint(1, 6))


def random_diffpoly(ring: JetRing, rng: random.Random, *, terms: int = 4, top: int = 5,
                    allow_L: bool = True, allow_neg: bool = True) -> DiffPoly:
    out = ring.zero()
    for _ in range(rng.randint(1, terms)):
        jets = {m: rng.randint(0, 2) for m in range(2, top + 1) if rng.random() < 0.4}
        params = {p: rng.randint(0, 2) for p in ring.params if rng.random() < 0.3}
        mono = ring.monomial(random_rational(rng), v=rng.randint(0, 2),
                             v1=rng.randint(-2 if allow_neg else 0, 2), jets=jets, params=params,
                             L=1 if allow_L and ring.use_L and rng.random() < 0.15 else 0,
                             X=1 if ring.use_X and rng.random() < 0.3 else 0)
        out = out + mono
    return out


# ---------------------------------------------------------------------------
# suites
# ---------------------------------------------------------------------------

def ring_suite(seed: int = 0, samples: int = 25) -> Iterator[Check]:
    rng = random.Random(seed)
    rings = [JetRing(["s1", "s2"]), JetRing(["s"], use_X=True, mu={(1,): 2})]
    for i in range(samples):
        ring = rings[i % len(rings)]
        a, b, c = (random_diffpoly(ring, rng) for _ in range(3))
        tag = f"seed {seed} sample {i}"
        yield Check("ring", f"associativity ({tag})", (a * b) * c == a * (b * c))
        yield Check("ring", f"distributivity ({tag})", a * (b + c) == a * b + a * c)
        yield Check("ring", f"commutativity ({tag})", a * b == b * a)
        yield Check("ring", f"Leibniz rule for d/dx ({tag})", dx(a * b) == dx(a) * b + a * dx(b))
        yield Check("ring", f"text round-trip ({tag})", parse(canonical_text(a), ring) == a)
        m = rng.randint(0, 5)
        lhs = pdiff(dx(a), m)
        rhs = dx(pdiff(a, m)) + (pdiff(a, m - 1) if m else ring.zero())
        yield Check("ring", f"[d/dv_{m}, d/dx] = d/dv_{m - 1} ({tag})", lhs == rhs)


def evaluation_suite(seed: int = 0, samples: int = 8) -> Iterator[Check]:
    """Evaluation on the topological solution is a ring homomorphism commuting with d/dx."""
    rng = random.Random(seed)
    ring = JetRing(["s1"])
    space = TSpace(range(0, 4), 4)
    jets = topological_jets(space, 8)
    sval = {"s1": mpq(2, 3)}
    x_shift = flow_tderiv  # d/dx = d/dt_0
    for i in range(samples):
        a = random_diffpoly(ring, rng, terms=3, top=4, allow_L=True, allow_neg=True)
        b = random_diffpoly(ring, rng, terms=3, top=4, allow_L=False, allow_neg=False)
        ea, eb = eval_on_tseries(a, jets, sval), eval_on_tseries(b, jets, sval)
        yield Check("evaluation", f"product (sample {i})", eval_on_tseries(a * b, jets, sval) == ea * eb)
        # d/dt_1 on jets agrees with the chain rule; compare coefficients of t_0^j t_1^k
        lhs = eval_on_tseries(x_shift(a, 0), jets, sval)
        want = _tderiv_series(ea, 0)
        yield Check("evaluation", f"d/dx commutes with evaluation (sample {i})", _agree_below(lhs, want, space.D - 1))


def _tderiv_series(s, p: int):
    space = s.space
    out = space.const(0)
    for key, c in s.terms.items():
        e = space.exps(key)
        k = e.get(p, 0)
        if not k:
            continue
        e2 = dict(e)
        e2[p] = k - 1
        if not e2[p]:
            del e2[p]
        out = out + space.const(c * k) * _mono_series(space, e2)
    return out


def _mono_series(space, exps):
    r = space.const(1)
    for p, k in exps.items():
        for _ in range(k):
            r = r * space.var(p)
    return r


def _agree_below(a, b, deg: int) -> bool:
    space = a.space
    keys = set(a.terms) | set(b.terms)
    for k in keys:
        if space.meta(k)[0] <= deg and a.terms.get(k, 0) != b.terms.get(k, 0):
            return False
    return True


def frobenius_suite(max_pq: int = 6, max_s: int = 6, max_trace: int = 12, max_alt: int = 8) -> Iterator[Check]:
    ring = JetRing([])
    for s in range(1, max_s + 1):
        for p in range(max_pq + 1):
            for q in range(max_pq + 1):
                lhs = omega(ring, p + s, q) + omega(ring, p, q + s).scale((-1) ** (s - 1))
                rhs = ring.zero()
                for ell in range(s):
                    rhs = rhs + (omega(ring, p, ell) * omega(ring, s - 1 - ell, q)).scale((-1) ** ell)
                if lhs != rhs:
                    yield Check("frobenius", f"two-point recursion s={s} p={p} q={q}", False,
                                f"{canonical_text(lhs)} != {canonical_text(rhs)}")
    yield Check("frobenius", f"two-point recursion for p,q <= {max_pq}, s <= {max_s}", True)
    for N in range(max_trace + 1):
        tot = ring.zero()
        for p in range(N + 1):
            tot = tot + omega(ring, p, N - p).scale((-1) ** p)
        want = tr_u(ring) if N == 0 else ring.zero()
        yield Check("frobenius", f"alternating trace N={N}", tot == want, f"{canonical_text(tot)} vs {canonical_text(want)}")
    # alternating jet sums: direct computation against the generating-function route
    base = [ring.v(0, p).scale(mpq(1, factorial(p))) for p in range(max_alt + 1)]
    derivs = {(p, l): dx_n(base[p], l) for p in range(max_alt + 1) for l in range(max_alt + 1)}
    for l in range(max_alt + 1):
        for m in range(max_alt + 1):
            for N in range(max_alt + 1):
                direct = ring.zero()
                for p in range(N + 1):
                    direct = direct + (derivs[(p, l)] * derivs[(N - p, m)]).scale((-1) ** p)
                if direct != alt_sum(ring, l, m, N):
                    yield Check("frobenius", f"alternating jet sum l={l} m={m} N={N}", False,
                                f"direct {canonical_text(direct)} vs generating {canonical_text(alt_sum(ring, l, m, N))}")
                if l + m < N and direct.terms:
                    yield Check("frobenius", f"vanishing l={l} m={m} N={N}", False, canonical_text(direct))
                if direct.terms and degbar(direct) > l + m - N:
                    yield Check("frobenius", f"degree bound l={l} m={m} N={N}", False, str(degbar(direct)))
    yield Check("frobenius", f"alternating jet sums, vanishing and degree bound (l,m,N <= {max_alt})", True)
    for k in range(1, 4):
        for m in range(0, 11):
            d = dk_on_jet(ring, k, m)
            if m < 2 * k:
                yield Check("frobenius", f"D_{k} kills v_{m}", not d.terms, canonical_text(d))
            elif d.terms:
                yield Check("frobenius", f"degbar D_{k}(v_{m}) <= {m - 2 * k}", degbar(d) <= m - 2 * k, str(degbar(d)))


def flow_suite(seed: int = 0, samples: int = 6) -> Iterator[Check]:
    rng = random.Random(seed)
    ring = JetRing(["s1"])
    for i in range(samples):
        f = random_diffpoly(ring, rng, terms=3, top=4)
        p, q = rng.randint(0, 3), rng.randint(0, 3)
        a = flow_tderiv(flow_tderiv(f, p), q)
        b = flow_tderiv(flow_tderiv(f, q), p)
        yield Check("flows", f"principal flows commute on f (t_{p}, t_{q}, sample {i})", a == b)


def recursion_suite(rec: HodgeRecursion | None = None, gmax: int = 4, extra_max: int = 3) -> Iterator[Check]:
    rec = rec or HodgeRecursion()
    r = rec.ring
    H1 = r.L().scale(mpq(1, 24)) - (r.param("s1") * r.v(0)).scale(mpq(1, 2))
    yield Check("recursion", "H_1 closed form", rec.potential(1) == H1, canonical_text(rec.potential(1)))
    for g in range(2, gmax + 1):
        fe = rec.F(g)
        try:
            check_free_energy(fe)
            ok, why = True, ""
        except Exception as err:  # report, do not abort the suite
            ok, why = False, str(err)
        yield Check("recursion", f"F_{g} structural laws", ok, why)
    for g in range(1, gmax + 1):
        bad = check_table(rec.table(g))
        yield Check("recursion", f"H_{g} stage invariants (degbar, no v, stage truncations)", not bad, "; ".join(bad))
    for g in range(1, extra_max + 1):
        extra = rec.extra_stage_term(g)
        yield Check("recursion", f"extra stage s_{g + 1} leaves H_{g} unchanged", not extra.terms, canonical_text(extra))


def hierarchy_suite(rec: HodgeRecursion | None = None, order: int = 4) -> Iterator[Check]:
    rec = rec or HodgeRecursion()
    hier = Hierarchy({g: rec.potential(g) for g in range(1, order // 2 + 1)}, order)
    yield Check("hierarchy", "quasi-Miura round trip", hier.miura.check_roundtrip())
    P = hier.operator()
    yield Check("hierarchy", "operator skew-adjoint", skew_defect(P).is_zero())
    cas = P.apply(variational_derivative(hier.density(-1)))
    yield Check("hierarchy", "Casimir density w", cas.is_zero())
    for q in range(0, 3):
        yield Check("hierarchy", f"t_{q} flow Hamiltonian", hier.hamiltonian_check(q).is_zero())
    for p in range(0, 3):
        for q in range(p + 1, 3):
            yield Check("hierarchy", f"tau-symmetry p={p} q={q}", hier.tau_symmetry_defect(p, q).is_zero())
            yield Check("hierarchy", f"flows t_{p}, t_{q} commute", hier.commutator(p, q).is_zero())


def lambda_suite(ex: Extractor | None = None, gmax: int = 4, seed: int = 0) -> Iterator[Check]:
    ex = ex or Extractor()
    for g in range(2, gmax + 1):
        try:
            ex.all_gfs(g)
            d = ex.diagnostics[g]
            ok = d["equations"] > d["unknowns"]
            yield Check("lambda", f"genus {g} extraction overdetermined and consistent", ok,
                        f"{d['equations']} equations, {d['unknowns']} unknowns")
        except Exception as err:
            yield Check("lambda", f"genus {g} extraction overdetermined and consistent", False, str(err))
    rng = random.Random(seed)
    for i in range(20):
        g = rng.randint(2, 6)
        idx = tuple(sorted(rng.randint(1, g) for _ in range(rng.randint(2, 5))))
        mono = LambdaPoly.monomial(g, idx)
        a = mumford_reduce(mono, order="largest")
        b = mumford_reduce(mono, order="smallest")
        c = mumford_reduce(mono, order=f"random:{rng.randint(0, 10 ** 6)}")
        yield Check("lambda", f"Mumford reduction order-independent g={g} {idx}", a == b == c)


SUITES: dict[str, Callable[..., Iterator[Check]]] = {
    "ring": ring_suite,
    "evaluation": evaluation_suite,
    "frobenius": frobenius_suite,
    "flows": flow_suite,
    "recursion": recursion_suite,
    "hierarchy": hierarchy_suite,
    "lambda": lambda_suite,
}


def run_core(seed: int = 0) -> list[Check]:
    rec = HodgeRecursion(default_ring())
    ex = Extractor(rec)
    out: list[Check] = []
    out += ring_suite(seed)
    out += evaluation_suite(seed)
    out += frobenius_suite()
    out += flow_suite(seed)
    out += recursion_suite(rec)
    out += hierarchy_suite(rec)
    out += lambda_suite(ex, seed=seed)
    return out
