"""Hodge potentials H_g of the point, built stage by stage in s_1, s_2, ...

Stage h adds the s_h dependence:
    H_{g,h} = sum_j H^(j) s_h^j,   H^(0) = H_{g,h-1},
    j H^(j) = D_h(H^(j-1)) + [s_h^(j-1)] E_{h,g,h}.
"""
from __future__ import annotations

import hashlib
from dataclasses import dataclass, field

from gmpy2 import mpq

from .free_energy import FreeEnergy, default_ring, free_energy
from .jetring import DiffPoly, JetRing, canonical_text, degbar, pdiff
from .point_frobenius import dk_apply, flow_tderiv

ALGO_VERSION = "1"


class RecursionError_(RuntimeError):
    pass


def n_bound(g: int, h: int) -> int:
    if g == 1:
        return 1
    return (3 * g - 3) // (2 * h - 1)


@dataclass
class HodgePotentialTable:
    genus: int
    stages: dict = field(default_factory=dict)  # h -> H_{g,h}
    N: dict = field(default_factory=dict)
    provenance: str = ""

    @property
    def final(self) -> DiffPoly:
        return self.stages[self.genus]


class HodgeRecursion:
    """Holds all computed stages {(g, h): H_{g,h}} for one parameter ring."""

    def __init__(self, ring: JetRing | None = None, *, store=None, free_energies: dict | None = None,
                 check_bounds: bool = True):
        self.ring = ring or default_ring()
        self.store = store
        self.check_bounds = check_bounds
        self._F: dict[int, FreeEnergy] = dict(free_energies or {})
        self.H: dict[tuple, DiffPoly] = {}
        self._flow_memo: dict = {}

    # -- inputs ---------------------------------------------------------
    def F(self, g: int) -> FreeEnergy:
        if g not in self._F:
            self._F[g] = free_energy(g, self.ring, store=self.store)
        return self._F[g]

    def provenance(self, g: int) -> str:
        h = hashlib.sha256(ALGO_VERSION.encode())
        for ell in range(1, g + 1):
            h.update(canonical_text(self.F(ell).poly).encode())
        return h.hexdigest()[:16]

    # -- stage access ---------------------------------------------------
    def stage(self, g: int, h: int) -> DiffPoly:
        """H_{g,h}; stages beyond g equal H_{g,g}."""
        h = min(h, g)
        key = (g, h)
        if key in self.H:
            return self.H[key]
        if h == 0:
            res = self.F(g).poly
        else:
            res = self._load(g, h)
            if res is None:
                prev = self.stage(g, h - 1)
                res = self.recursion_step(g, h, prev)
                self._save(g, h, res)
        self.H[key] = res
        return res

    def _skey(self, g, h):
        return {"genus": g, "stage": h, "prov": self.provenance(g), "params": list(self.ring.params)}

    def _load(self, g, h):
        if self.store is None:
            return None
        return self.store.get_poly("hodge-stage", self._skey(g, h), self.ring)

    def _save(self, g, h, poly):
        if self.store is not None:
            self.store.put_poly("hodge-stage", self._skey(g, h), poly)

    def tderiv(self, g: int, h: int, p: int) -> DiffPoly:
        key = (g, min(h, g), p)
        r = self._flow_memo.get(key)
        if r is None:
            r = flow_tderiv(self.stage(g, h), p)
            self._flow_memo[key] = r
        return r

    # -- E terms ---------------------------------------------------------
    def e_term(self, k: int, g: int, h: int | None = None) -> DiffPoly:
        """E_{k,g} built from stage-h potentials of lower genera (h defaults to k)."""
        if h is None:
            h = k
        ring = self.ring
        N = 2 * k - 2
        total = ring.zero()
        if g == 1:
            # genus-zero second derivatives: sum (-1)^p Omega_{p,N-p} = v delta_{N,0}
            if N == 0:
                total = ring.v(0)
        else:
            firsts = {}
            for p in range(N + 1):
                q = N - p
                a, b = min(p, q), max(p, q)
                if a not in firsts:
                    firsts[a] = self.tderiv(g - 1, h, a)
                t = flow_tderiv(firsts[a], b)
                total = total + (t if p % 2 == 0 else -t)
            for ell in range(1, g):
                m = g - ell
                if m < ell:
                    # symmetric partner already counted via the (ell, m) term with a sign
                    continue
                for p in range(N + 1):
                    t = self.tderiv(ell, h, p) * self.tderiv(m, h, N - p)
                    t = t if p % 2 == 0 else -t
                    if m != ell:
                        # (m, ell) term with index p' = N - p has the same sign since N even
                        t = t + t
                    total = total + t
        return total.scale(mpq(-1, 2))

    # -- recursion -------------------------------------------------------
    def recursion_step(self, g: int, h: int, prev: DiffPoly, *, extra: bool = False) -> DiffPoly:
        name = f"s{h}"
        if name not in self.ring.params:
            raise RecursionError_(f"ring lacks parameter {name}")
        E = self.e_term(h, g, h)
        N = n_bound(g, h)
        sh = self.ring.param(name)
        result = prev
        cur = prev
        power = self.ring.one()
        for j in range(1, N + 2):
            nxt = dk_apply(h, cur) + E.coeff_param_power(name, j - 1)
            nxt = nxt.scale(mpq(1, j))
            if j == N + 1:
                if nxt.terms:
                    raise RecursionError_(f"H_{{{g},{h}}} has a nonzero s_{h}^{j} coefficient beyond the bound {N}")
                break
            if self.check_bounds and g >= 2 and nxt.terms:
                bound = 3 * g - 3 - (2 * h - 1) * j
                if degbar(nxt) > bound:
                    raise RecursionError_(f"degbar of H_{{{g},{h}}}^({j}) is {degbar(nxt)} > {bound}")
            power = power * sh
            result = result + nxt * power
            cur = nxt
        return result

    def extra_stage_term(self, g: int) -> DiffPoly:
        """First-order term an extra stage h = g+1 would add; must vanish."""
        h = g + 1
        E = self.e_term(h, g, h)
        name = f"s{h}"
        if name in self.ring.params:
            E = E.coeff_param_power(name, 0)
        return dk_apply(h, self.stage(g, g)) + E

    def potential(self, g: int) -> DiffPoly:
        return self.stage(g, g)

    def table(self, g: int) -> HodgePotentialTable:
        t = HodgePotentialTable(g, provenance=self.provenance(g))
        for h in range(0, g + 1):
            t.stages[h] = self.stage(g, h)
            if h:
                t.N[h] = n_bound(g, h)
        return t


def check_table(tab: HodgePotentialTable) -> list[str]:
    """Stage invariants; returns a list of violations (empty if all hold)."""
    bad = []
    g = tab.genus
    ring = tab.final.ring
    for h in range(1, g + 1):
        H = tab.stages[h]
        if H.coeff_param_power(f"s{h}", 0) != tab.stages[h - 1]:
            bad.append(f"H_{{{g},{h}}} at s_{h}=0 differs from H_{{{g},{h - 1}}}")
        if H.param_degree(f"s{h}") > n_bound(g, h):
            bad.append(f"s_{h}-degree of H_{{{g},{h}}} exceeds {n_bound(g, h)}")
    if g >= 2:
        if degbar(tab.final) > 3 * g - 3:
            bad.append(f"degbar(H_{g}) = {degbar(tab.final)} > {3 * g - 3}")
        if pdiff(tab.final, 0).terms:
            bad.append(f"H_{g} depends on v")
    for k in range(g + 1, len(ring.params) + 1):
        if tab.final.param_degree(f"s{k}") > 0:
            bad.append(f"H_{g} depends on s_{k}")
    return bad


def hodge_potential(g: int, ring: JetRing | None = None, *, verify_extra_stage: bool = False,
                    recursion: HodgeRecursion | None = None) -> HodgePotentialTable:
    rec = recursion or HodgeRecursion(ring)
    tab = rec.table(g)
    if verify_extra_stage:
        extra = rec.extra_stage_term(g)
        if extra.terms:
            raise RecursionError_(f"extra stage s_{g + 1} changes H_{g}: {canonical_text(extra)}")
    return tab
