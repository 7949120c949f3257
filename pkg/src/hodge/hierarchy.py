"""The Hodge hierarchy of a point in the normal coordinate w.

A MiuraMap carries a change of dependent variable new = forward(old jets),
computes its inverse order by order and transports functions, flows,
densities and Hamiltonian operators.  The quasi-Miura map
w = v + sum eps^(2g) dx^2 H_g is one instance.
"""
from __future__ import annotations

from math import comb, factorial

from gmpy2 import mpq

from .jetring import DiffPoly, EpsExpansion, JetRing, dx, pdiff, taylor_compose
from .point_frobenius import flow_tderiv, velocity


class HierarchyError(RuntimeError):
    pass


# ---------------------------------------------------------------------------
# differential operators
# ---------------------------------------------------------------------------

def _dxn(c, n: int):
    for _ in range(n):
        c = c.dx()
    return c


class DiffOperator:
    """sum_k c_k d_x^k; coefficients are DiffPoly or EpsExpansion."""

    __slots__ = ("coeffs",)

    def __init__(self, coeffs: dict):
        self.coeffs = {k: c for k, c in coeffs.items() if not c.is_zero()}

    def __repr__(self):
        return "DiffOperator(" + ", ".join(f"d^{k}: {c!r}" for k, c in sorted(self.coeffs.items())) + ")"

    def order(self) -> int:
        return max(self.coeffs, default=-1)

    def __getitem__(self, k):
        return self.coeffs[k]

    def is_zero(self) -> bool:
        return not self.coeffs

    def __eq__(self, other):
        if not isinstance(other, DiffOperator):
            return NotImplemented
        return self.coeffs.keys() == other.coeffs.keys() and all(c == other.coeffs[k] for k, c in self.coeffs.items())

    __hash__ = None

    def __add__(self, other: "DiffOperator") -> "DiffOperator":
        out = dict(self.coeffs)
        for k, c in other.coeffs.items():
            out[k] = out[k] + c if k in out else c
        return DiffOperator(out)

    def __neg__(self):
        return DiffOperator({k: -c for k, c in self.coeffs.items()})

    def __sub__(self, other):
        return self + (-other)

    def compose(self, other: "DiffOperator") -> "DiffOperator":
        """(a d^i) o (b d^j) = sum_r C(i,r) a dx^r(b) d^(i+j-r)."""
        out: dict = {}
        derivs: dict = {}
        for j, b in other.coeffs.items():
            derivs[(j, 0)] = b
        for i, a in self.coeffs.items():
            for j, b in other.coeffs.items():
                for r in range(i + 1):
                    key = (j, r)
                    if key not in derivs:
                        derivs[key] = derivs[(j, r - 1)].dx()
                    db = derivs[key]
                    if db.is_zero():
                        continue
                    t = (a * db)
                    if r:
                        t = t.scale(comb(i, r))
                    k = i + j - r
                    out[k] = out[k] + t if k in out else t
        return DiffOperator(out)

    __matmul__ = compose

    def adjoint(self) -> "DiffOperator":
        """(a d^k)^dagger = (-d)^k o a = (-1)^k sum_r C(k,r) dx^r(a) d^(k-r)."""
        out: dict = {}
        for k, a in self.coeffs.items():
            da = a
            for r in range(k + 1):
                if r:
                    da = da.dx()
                if da.is_zero():
                    break
                t = da.scale((-1) ** k * comb(k, r))
                key = k - r
                out[key] = out[key] + t if key in out else t
        return DiffOperator(out)

    def apply(self, f):
        acc = None
        d = f
        for k in range(0, self.order() + 1):
            if k:
                d = d.dx()
            if k in self.coeffs:
                t = self.coeffs[k] * d
                acc = t if acc is None else acc + t
        return acc

    def map(self, fn) -> "DiffOperator":
        return DiffOperator({k: fn(c) for k, c in self.coeffs.items()})

    def eps_slice(self, n: int) -> dict:
        """{k: DiffPoly} coefficient of eps^n (EpsExpansion coefficients)."""
        return {k: c[n] for k, c in self.coeffs.items() if c[n].terms}


# ---------------------------------------------------------------------------
# calculus on densities
# ---------------------------------------------------------------------------

def variational_derivative(d):
    """sum_s (-dx)^s (d d / d w_s); accepts DiffPoly or EpsExpansion."""
    if isinstance(d, EpsExpansion):
        return d.map(variational_derivative)
    # Horner in (-dx) from the highest jet down
    out = d.ring.zero()
    for s in range(d.max_jet(), -1, -1):
        out = pdiff(d, s) - dx(out)
    return out


def jet_free_part(d: DiffPoly) -> DiffPoly:
    r = d.ring
    jm = ~r.param_mask
    return DiffPoly(r, {k: c for k, c in d.terms.items() if (k & jm) == r.one_key})


def densities_equivalent(a, b) -> bool:
    """Equal modulo total x-derivatives (same variational derivative and constant part)."""
    if isinstance(a, EpsExpansion):
        N = min(a.order, b.order)
        return all(densities_equivalent(a[n], b[n]) for n in range(N + 1))
    diff = a - b
    return not variational_derivative(diff).terms and not jet_free_part(diff).terms


def evolutionary(h, F):
    """Derivative of h along w_t = F: sum_s (d h/d w_s) dx^s F."""
    if isinstance(h, EpsExpansion):
        if not isinstance(F, EpsExpansion):
            F = EpsExpansion(h.ring, {0: F}, h.order)
        N = min(h.order, F.order)
        top = h.max_jet()
        out = EpsExpansion(h.ring, {}, N)
        dF = F
        for s in range(0, top + 1):
            if s:
                dF = dF.dx()
            ps = h.pdiff(s)
            if ps.coeffs:
                out = out + ps * dF
        return out
    out = h.ring.zero()
    dF = F
    for s in range(0, h.max_jet() + 1):
        if s:
            dF = dx(dF)
        ps = pdiff(h, s)
        if ps.terms:
            out = out + ps * dF
    return out


# ---------------------------------------------------------------------------
# changes of coordinates
# ---------------------------------------------------------------------------

class MiuraMap:
    """new = forward(old-jets), forward[0] = v; both coordinates share one ring."""

    def __init__(self, forward: EpsExpansion):
        self.forward = forward
        self.ring = forward.ring
        self.order = forward.order
        v = self.ring.v(0)
        if forward[0] != v:
            raise HierarchyError("forward map must start with the identity")
        if forward[1].terms:
            raise HierarchyError("forward map must have no eps^1 term")
        self._inverse: EpsExpansion | None = None
        self._delta: dict[int, EpsExpansion] = {}

    def correction(self) -> EpsExpansion:
        return self.forward - self.ring.v(0)

    @staticmethod
    def _compose(f: EpsExpansion, delta, order: int) -> EpsExpansion:
        out = EpsExpansion(f.ring, {}, order)
        for n, c in f.coeffs.items():
            if n > order:
                continue
            out = out + taylor_compose(c, delta, order - n).shift(n, order)
        return out

    def inverse(self) -> EpsExpansion:
        """old as a function of new jets (fixed point of old = new - A(old))."""
        if self._inverse is None:
            A = self.correction()
            N = self.order
            B = EpsExpansion(self.ring, {}, N)
            for _ in range(N // 2 + 1):
                cache: dict = {}

                def delta(m, B=B, cache=cache):
                    if m not in cache:
                        cache[m] = B if m == 0 else delta(m - 1).dx()
                    return cache[m]

                B = -self._compose(A, delta, N)
            self._inverse = B + self.ring.v(0)
        return self._inverse

    def delta(self, m: int) -> EpsExpansion:
        d = self._delta.get(m)
        if d is None:
            d = self.inverse() - self.ring.v(0) if m == 0 else self.delta(m - 1).dx()
            self._delta[m] = d
        return d

    def substitute(self, f) -> EpsExpansion:
        """Re-express a function of old jets in new jets."""
        if isinstance(f, DiffPoly):
            f = EpsExpansion(self.ring, {0: f}, self.order)
        return self._compose(f, self.delta, min(self.order, f.order))

    def transform_flow(self, F) -> EpsExpansion:
        """old_t = F(old)  ->  new_t as a function of new jets."""
        if isinstance(F, DiffPoly):
            F = EpsExpansion(self.ring, {0: F}, self.order)
        G = evolutionary(self.forward, F)
        return self.substitute(G)

    def lstar(self) -> DiffOperator:
        top = self.forward.max_jet()
        return DiffOperator({s: self.forward.pdiff(s) for s in range(0, top + 1)})

    def transform_operator(self, P: DiffOperator) -> DiffOperator:
        """P_new = L* o P o L with L* = sum (d new/d old_s) dx^s and L its adjoint."""
        Ls = self.lstar()
        L = Ls.adjoint()
        Q = Ls.compose(P.compose(L))
        return Q.map(self.substitute)

    def check_roundtrip(self) -> bool:
        """forward(inverse(w)) == w through the truncation order."""
        back = self.substitute(self.forward)
        return back == EpsExpansion.of(self.ring.v(0), self.order)


# ---------------------------------------------------------------------------
# the Hodge hierarchy
# ---------------------------------------------------------------------------

class Hierarchy:
    """Built from Hodge potentials {g: H_g} (all in one ring) through eps^order."""

    def __init__(self, potentials: dict, order: int = 4):
        if order % 2:
            raise ValueError("order must be even")
        need = order // 2
        missing = [g for g in range(1, need + 1) if g not in potentials]
        if missing:
            raise HierarchyError(f"missing genus data for g = {missing}")
        self.H = {g: potentials[g] for g in range(1, need + 1)}
        self.ring: JetRing = self.H[1].ring
        self.order = order
        coeffs = {0: self.ring.v(0)}
        for g, Hg in self.H.items():
            coeffs[2 * g] = dx(dx(Hg))
        self.forward = EpsExpansion(self.ring, coeffs, order)
        self.miura = MiuraMap(self.forward)
        self._flows: dict = {}
        self._densities: dict = {}
        self._operator = None

    def inverse(self) -> EpsExpansion:
        return self.miura.inverse()

    def flow(self, q: int) -> EpsExpansion:
        """dw/dt_q in w-jets."""
        if q not in self._flows:
            F = EpsExpansion(self.ring, {0: velocity(self.ring, q, 0)}, self.order)
            self._flows[q] = self.miura.transform_flow(F)
        return self._flows[q]

    def flow_for_velocity(self, vel: DiffPoly) -> EpsExpansion:
        """Flow whose dispersionless part is v_t = vel (linear combinations of t_q flows)."""
        return self.miura.transform_flow(EpsExpansion(self.ring, {0: vel}, self.order))

    def operator(self) -> DiffOperator:
        if self._operator is None:
            one = EpsExpansion(self.ring, {0: self.ring.one()}, self.order)
            self._operator = self.miura.transform_operator(DiffOperator({1: one}))
        return self._operator

    def density(self, p: int) -> EpsExpansion:
        """h_p in w-jets, p >= -1; h_p(v) = v^(p+2)/(p+2)! + sum eps^(2g) dx d_{t_(p+1)} H_g."""
        if p not in self._densities:
            r = self.ring
            coeffs = {0: r.v(0, p + 2).scale(mpq(1, factorial(p + 2)))}
            for g, Hg in self.H.items():
                coeffs[2 * g] = dx(flow_tderiv(Hg, p + 1))
            self._densities[p] = self.miura.substitute(EpsExpansion(r, coeffs, self.order))
        return self._densities[p]

    def hamiltonian_check(self, q: int) -> EpsExpansion:
        """flow(q) - P (delta H_q / delta w); zero when the flow is Hamiltonian."""
        P = self.operator()
        rhs = P.apply(variational_derivative(self.density(q)))
        return self.flow(q) - rhs

    def tau_symmetry_defect(self, p: int, q: int) -> EpsExpansion:
        a = evolutionary(self.density(p - 1), self.flow(q))
        b = evolutionary(self.density(q - 1), self.flow(p))
        return a - b

    def commutator(self, p: int, q: int) -> EpsExpansion:
        return evolutionary(self.flow(q), self.flow(p)) - evolutionary(self.flow(p), self.flow(q))


def skew_defect(P: DiffOperator) -> DiffOperator:
    """P + P^dagger (zero for skew-adjoint P)."""
    return P + P.adjoint()
