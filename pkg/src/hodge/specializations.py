"""Named specializations of the Hodge hierarchy and the normal form of h_1.

Each check returns a Report whose items carry both sides of every comparison,
so a failure can be printed without recomputation.
"""
from __future__ import annotations

from dataclasses import dataclass, field
from math import factorial

from gmpy2 import mpq

from . import linalg
from .free_energy import bernoulli
from .hierarchy import (DiffOperator, Hierarchy, MiuraMap, densities_equivalent, variational_derivative)
from .hodge_recursion import HodgeRecursion
from .jetring import DiffPoly, EpsExpansion, JetRing, canonical_text, dx, dx_n, pdiff, subs_params


class SpecializationError(RuntimeError):
    pass


@dataclass
class CheckItem:
    label: str
    ok: bool
    got: str
    want: str


@dataclass
class Report:
    name: str
    items: list = field(default_factory=list)
    notes: list = field(default_factory=list)

    @property
    def ok(self) -> bool:
        return bool(self.items) and all(i.ok for i in self.items)

    def add(self, label: str, got, want) -> bool:
        ok = got == want
        self.items.append(CheckItem(label, ok, _show(got), _show(want)))
        return ok

    def failures(self) -> list:
        return [i for i in self.items if not i.ok]


def _show(x) -> str:
    if isinstance(x, DiffPoly):
        return canonical_text(x)
    if isinstance(x, EpsExpansion):
        return "; ".join(f"eps^{n}: {canonical_text(x[n])}" for n in range(x.order + 1) if x[n].terms) or "0"
    if isinstance(x, DiffOperator):
        parts = []
        for k, c in sorted(x.coeffs.items()):
            parts.append(f"d^{k}: [{_show(c)}]")
        return ", ".join(parts) or "0"
    if isinstance(x, dict):
        return "{" + ", ".join(f"{k}: {_show(v)}" for k, v in sorted(x.items())) + "}"
    return str(x)


# ---------------------------------------------------------------------------
# parameter rules
# ---------------------------------------------------------------------------

def ilw_rule(k: int) -> mpq:
    """s_k = ilw_rule(k) * s^(2k-1)."""
    return -bernoulli(2 * k) / (2 * k * (2 * k - 1))


def volterra_rule(k: int) -> mpq:
    """s_k = volterra_rule(k) * s^(2k-1)."""
    return (4 ** k - 1) * bernoulli(2 * k) / (2 * k * (2 * k - 1))


def cubic_rule(k: int, p, q) -> mpq:
    p, q = mpq(p), mpq(q)
    if p + q == 0:
        raise ValueError("cubic rule needs p + q != 0")
    r = p * q / (p + q)
    n = 2 * k - 1
    return -bernoulli(2 * k) / (2 * k * (2 * k - 1)) * (p ** n + q ** n - r ** n)


def _default_recursion(rec):
    return rec if rec is not None else HodgeRecursion()


def specialized_potentials(rec: HodgeRecursion, target: JetRing, images: dict, gmax: int) -> dict:
    return {g: subs_params(rec.potential(g), target, images) for g in range(1, gmax + 1)}


def _one_param_images(src: JetRing, target: JetRing, rule) -> dict:
    s = target.param("s")
    out = {}
    for name in src.params:
        k = int(name[1:])
        out[name] = (s ** (2 * k - 1)).scale(rule(k))
    return out


# ---------------------------------------------------------------------------
# ILW
# ---------------------------------------------------------------------------

def ilw_check(order: int = 4, recursion: HodgeRecursion | None = None) -> Report:
    rec = _default_recursion(recursion)
    R = JetRing(["s"])
    s = R.param("s")
    pots = specialized_potentials(rec, R, _one_param_images(rec.ring, R, ilw_rule), order // 2)
    hier = Hierarchy(pots, order)
    rep = Report("ilw")
    # w -> u
    fwd = {0: R.v(0)}
    for g in range(1, order // 2 + 1):
        c = mpq((-1) ** g, 2 ** (2 * g) * factorial(2 * g + 1))
        fwd[2 * g] = (s ** g).scale(c) * R.v(2 * g)
    to_u = MiuraMap(EpsExpansion(R, fwd, order))
    flow_u = to_u.transform_flow(hier.flow(1))
    want = {0: R.v(0) * R.v(1)}
    for g in range(1, order // 2 + 1):
        c = abs(bernoulli(2 * g)) / factorial(2 * g)
        want[2 * g] = (s ** (g - 1)).scale(c) * R.v(2 * g + 1)
    want = EpsExpansion(R, want, order)
    for n in range(0, order + 1, 2):
        rep.add(f"t1 flow in u, eps^{n}", flow_u[n], want[n])
    P = hier.operator()
    Pw = {1: EpsExpansion.of(R.one(), order)}
    for g in range(1, order // 2 + 1):
        c = (2 * g - 1) * abs(bernoulli(2 * g)) / factorial(2 * g)
        Pw[2 * g + 1] = EpsExpansion(R, {2 * g: (s ** g).scale(c)}, order)
    for k in sorted(set(P.coeffs) | set(Pw)):
        got = P.coeffs.get(k, EpsExpansion(R, {}, order))
        rep.add(f"operator d^{k}", _show(got), _show(Pw.get(k, EpsExpansion(R, {}, order))))
    return rep


# ---------------------------------------------------------------------------
# Volterra / discrete KdV
# ---------------------------------------------------------------------------

def _rescale_double(F: EpsExpansion, target: JetRing) -> EpsExpansion:
    """Given w_t = F(w) with X = e^(2w), return W_t for W = 2w with X = e^W."""
    src = F.ring
    out = {}
    for n, c in F.coeffs.items():
        terms = {}
        for k, a in c.terms.items():
            d = src.decode(k)
            if d[src.i_L]:
                raise SpecializationError("log v_x survives in the Volterra flow")
            wt = d[src.i_v] + d[src.i_v1] + sum(d[src.K + 2 + m] for m in range(2, src.max_jet + 1))
            e = {target.i_v: d[src.i_v], target.i_v1: d[src.i_v1], target.i_X: d[src.i_X]}
            for m in range(2, src.max_jet + 1):
                if d[src.K + 2 + m]:
                    e[target.jet_field(m)] = d[src.K + 2 + m]
            terms[target.encode(e)] = 2 * a * mpq(1, 2) ** wt if wt >= 0 else 2 * a * 2 ** (-wt)
        out[n] = DiffPoly(target, terms)
    return EpsExpansion(target, out, F.order)


def volterra_check(order: int = 4, recursion: HodgeRecursion | None = None) -> Report:
    rec = _default_recursion(recursion)
    R = JetRing(["s"], use_X=True, mu={(1,): 2})
    s = R.param("s")
    pots = specialized_potentials(rec, R, _one_param_images(rec.ring, R, volterra_rule), order // 2)
    hier = Hierarchy(pots, order)
    rep = Report("volterra")
    X = R.X()
    flow = hier.flow_for_velocity(X * R.v(1) * 2)
    m = R.monomial
    # combined flow before rescaling, eps^2
    want2 = (m(mpq(-1, 3), jets={}, v1=3, X=1) * s ** 3 + m(mpq(1, 3), v1=1, X=1, jets={2: 1}) * s ** 2
             + m(mpq(1, 3), X=1, jets={3: 1}) * s)
    rep.add("combined flow, eps^0", flow[0], X * R.v(1) * 2)
    if order >= 2:
        rep.add("combined flow, eps^2", flow[2], want2)
    # s = 1, W = 2w
    R2 = JetRing([], use_X=True, mu={(): 2})
    at1 = EpsExpansion(R2, {n: subs_params(c, R2, {"s": 1}) for n, c in flow.coeffs.items()}, flow.order)
    R1 = JetRing([], use_X=True, mu={(): 1})
    W = _rescale_double(at1, R1)
    m1 = R1.monomial
    rep.add("rescaled flow, eps^0", W[0], m1(2, v1=1, X=1))
    if order >= 2:
        rep.add("rescaled flow, eps^2", W[2],
                m1(mpq(-1, 12), v1=3, X=1) + m1(mpq(1, 6), v1=1, X=1, jets={2: 1}) + m1(mpq(1, 3), X=1, jets={3: 1}))
    fwd = {0: R1.v(0)}
    for k in range(1, order // 2 + 1):
        fwd[2 * k] = R1.v(2 * k).scale(mpq(3 ** (2 * k + 2) - 1, factorial(2 * k + 2) * 4 ** (k + 1)))
    to_u = MiuraMap(EpsExpansion(R1, fwd, order))
    U = to_u.transform_flow(W)
    Xu = R1.X()
    lattice = {}
    for j in range(0, order // 2 + 1):
        lattice[2 * j] = dx_n(Xu, 2 * j + 1).scale(mpq(2, factorial(2 * j + 1)))
    lattice = EpsExpansion(R1, lattice, order)
    for n in range(0, order + 1, 2):
        rep.add(f"discrete KdV, eps^{n}", U[n], lattice[n])
    return rep


# ---------------------------------------------------------------------------
# cubic
# ---------------------------------------------------------------------------

DEFAULT_CUBIC_SAMPLES = ((1, 1), (-2, 1), (3, mpq(1, 2)), (0, 1))

_X_OVER_SIN = (mpq(1), mpq(1, 6), mpq(7, 360), mpq(31, 15120), mpq(127, 604800), mpq(73, 3421440))


def closed_form_operator(p, q, order: int) -> dict:
    """{k: coefficient of eps^(k-1) d^k} from prod_i (a_i e d / sin(a_i e d)) o d."""
    p, q = mpq(p), mpq(q)
    a2 = (p * p / (4 * (p + q)), q * q / (4 * (p + q)), (p + q) / 4)
    N = order // 2
    if N >= len(_X_OVER_SIN):
        raise ValueError("closed form tabulated through eps^10")
    series = [mpq(1)] + [mpq(0)] * N
    for a in a2:
        fac = [_X_OVER_SIN[j] * a ** j for j in range(N + 1)]
        series = [sum(series[i] * fac[n - i] for i in range(n + 1)) for n in range(N + 1)]
    return {2 * n + 1: series[n] for n in range(N + 1)}


def cubic_check(order: int = 6, samples=DEFAULT_CUBIC_SAMPLES, recursion: HodgeRecursion | None = None) -> Report:
    rec = _default_recursion(recursion)
    rep = Report("cubic")
    R = JetRing([])
    for p, q in samples:
        p, q = mpq(p), mpq(q)
        tag = f"(p,q)=({p},{q})"
        svals = {name: cubic_rule(int(name[1:]), p, q) for name in rec.ring.params}
        pots = specialized_potentials(rec, R, svals, order // 2)
        P = Hierarchy(pots, order).operator()
        s1, s2 = svals["s1"], svals.get("s2", mpq(0))
        table = {1: mpq(1), 3: -s1, 5: mpq(3, 5) * s1 ** 2, 7: -(mpq(31, 105) * s1 ** 3 + s2 / 504)}
        closed = closed_form_operator(p, q, order)
        jet_dependent, stray = [], []
        for k in range(0, order + 2):
            c = P.coeffs.get(k, EpsExpansion(R, {}, order))
            for n in range(order + 1):
                cn = c[n]
                if cn.terms and not cn.is_jet_free():
                    jet_dependent.append(f"d^{k} eps^{n}: {canonical_text(cn)}")
                # only the eps^(k-1) slot may be occupied
                if cn.terms and n != k - 1:
                    stray.append(f"d^{k} eps^{n}")
            got = c[k - 1] if 1 <= k <= order + 1 else R.zero()
            if k % 2 == 1:
                got_c = got.const_value() if got.is_jet_free() else canonical_text(got)
                if k in table:
                    rep.add(f"{tag} d^{k} vs table", got_c, table[k])
                rep.add(f"{tag} d^{k} vs closed form", got_c, closed[k])
        rep.add(f"{tag} operator jet-free", jet_dependent, [])
        rep.add(f"{tag} operator has only eps^(k-1) d^k terms", stray, [])
    # the (-2, 1) sample is the Volterra rule at s = 1
    for k in range(1, 4):
        rep.add(f"cubic(-2,1) s_{k} = Volterra s_{k}", cubic_rule(k, -2, 1), volterra_rule(k))
    return rep


# ---------------------------------------------------------------------------
# normal form of h_1
# ---------------------------------------------------------------------------

def _split_jets(d: DiffPoly) -> dict:
    """{jet key: parameter-only DiffPoly}."""
    r = d.ring
    pm = r.param_mask
    out: dict = {}
    for k, c in d.terms.items():
        pk = (k & pm) + r.one_key
        jk = k - (k & pm)
        out.setdefault(jk, {})[pk] = c
    return {jk: DiffPoly(r, t) for jk, t in out.items()}


def _partitions(n: int, smallest: int = 1, largest: int | None = None):
    if largest is None:
        largest = n
    if n == 0:
        yield ()
        return
    for part in range(min(n, largest), smallest - 1, -1):
        for rest in _partitions(n - part, smallest, part):
            yield (part,) + rest


def _monomial(ring: JetRing, parts, wpow: int = 0) -> DiffPoly:
    jets: dict = {}
    for p in parts:
        jets[p] = jets.get(p, 0) + 1
    v1 = jets.pop(1, 0)
    return ring.monomial(1, v=wpow, v1=v1, jets=jets)


def _factors(ring: JetRing, key: int) -> int:
    d = ring.decode(key)
    if d[ring.i_v1] < 0 or d[ring.i_L] or d[ring.i_X]:
        raise SpecializationError("density is not polynomial in w-jets")
    return d[ring.i_v] + d[ring.i_v1] + sum(d[ring.K + 2 + m] for m in range(2, ring.max_jet + 1))


def candidate_monomials(ring: JetRing, degree: int, max_factors: int) -> list:
    out = []
    for parts in _partitions(degree):
        for wp in range(0, max_factors - len(parts) + 1):
            out.append(_monomial(ring, parts, wp))
    return out


def standard_monomials(ring: JetRing, n: int) -> list:
    """Standard monomials at eps^(2n): w_1^2 for n = 1, then rules (i)/(ii)."""
    if n == 1:
        return [ring.v(1, 2)]
    out = []
    for parts in _partitions(2 * n, smallest=2):
        if len(parts) >= 2 and parts[0] == parts[1]:
            out.append(_monomial(ring, parts))
    return out


@dataclass
class NormalForm:
    order: int
    standard: dict            # n -> [(monomial, coefficient)]
    a: dict                   # i -> coefficient of eps^(2i+2) w_2^(i+1); a[0] from -24 * [w_1^2]
    b: list                   # remaining coefficients in order
    transformation: EpsExpansion
    density: EpsExpansion     # h_1 in the new coordinate


def _operator_shift(a: DiffPoly) -> DiffOperator:
    """First-order change of d/dx under w -> w + eps^(2n) dx^2 a: M* o d - (M* o d)^dagger."""
    ring = a.ring
    f = dx(dx(a))
    Ms = DiffOperator({s: pdiff(f, s) for s in range(0, f.max_jet() + 1)})
    K = Ms.compose(DiffOperator({1: ring.one()}))
    return K - K.adjoint()


def reduce_order(D: DiffPoly, n: int, extra: int = 0, P: dict | None = None):
    """Find A, B, gamma with D - (w^2/2) dx^2 A + dx B = sum gamma std, gamma unique.

    ``P`` ({k: DiffPoly}) is the eps^(2n) part of the current Hamiltonian operator;
    when given, A must also cancel it so that the operator stays d/dx.
    """
    ring = D.ring
    F = max((_factors(ring, k) for k in D.terms), default=2) + extra
    A_mon = candidate_monomials(ring, 2 * n - 2, max(F - 2, 0))
    B_mon = candidate_monomials(ring, 2 * n - 1, F)
    std = standard_monomials(ring, n)
    half_w2 = ring.v(0, 2).scale(mpq(1, 2))
    cols = [-(half_w2 * dx(dx(a))) for a in A_mon] + [dx(b) for b in B_mon] + [-s for s in std]
    nA, nB = len(A_mon), len(B_mon)
    n_cols = len(cols)
    rows_by_key: dict = {}
    for j, col in enumerate(cols):
        for k, c in col.terms.items():
            rows_by_key.setdefault(("h", k), {})[j] = c
    target = {("h", k): c for k, c in _split_jets(D).items()}
    if P is not None:
        for j, a in enumerate(A_mon):
            for order_k, c in _operator_shift(a).coeffs.items():
                for k, x in c.terms.items():
                    rows_by_key.setdefault(("P", order_k, k), {})[j] = x
        for order_k, c in P.items():
            for k, x in _split_jets(c).items():
                target[("P", order_k, k)] = x
    keys = sorted(set(rows_by_key) | set(target))
    rows = [rows_by_key.get(k, {}) for k in keys]
    rhs = [-target[k] if k in target else ring.zero() for k in keys]
    try:
        linalg.solve(rows, rhs, n_cols, zero=ring.zero())
    except linalg.RankDeficient as err:
        bad = [std[j - nA - nB] for j in err.free if j >= nA + nB]
        if bad:
            raise SpecializationError(
                f"eps^{2 * n}: standard monomials not independent modulo eliminations: "
                f"{[canonical_text(b) for b in bad]}") from None
    except linalg.InconsistentSystem:
        pass
    try:
        x = linalg.solve(rows, rhs, n_cols, zero=ring.zero(), allow_free=True)
    except linalg.InconsistentSystem as err:
        key = keys[err.row]
        what = "operator" if key[0] == "P" else "density"
        mono = canonical_text(DiffPoly(ring, {key[-1]: mpq(1)}))
        raise SpecializationError(f"eps^{2 * n}: {what} monomial {mono} cannot be eliminated") from None
    A = ring.zero()
    for c, mono in zip(x[:nA], A_mon):
        A = A + c * mono
    gammas = [(s, c) for s, c in zip(std, x[nA + nB:])]
    return A, gammas


def normal_form_h1(order: int = 6, recursion: HodgeRecursion | None = None, density: EpsExpansion | None = None,
                   operator: DiffOperator | None = None) -> NormalForm:
    """Bring h_1 to the standard form by a normal Miura map that also sends the operator to d/dx.

    Without an operator (only possible when ``density`` is given) the operator
    constraint is dropped and the map is fixed only modulo its kernel.
    """
    if density is None:
        rec = _default_recursion(recursion)
        pots = {g: rec.potential(g) for g in range(1, order // 2 + 1)}
        hier = Hierarchy(pots, order)
        density, operator = hier.density(1), hier.operator()
    ring = density.ring
    h = density
    P = operator
    total = EpsExpansion.of(ring.v(0), order)
    standard = {}
    for n in range(1, order // 2 + 1):
        A, gam, last = None, None, None
        Pn = None if P is None else {k: c[2 * n] for k, c in P.coeffs.items() if c[2 * n].terms}
        if Pn is not None:
            low = [(k, m) for k, c in P.coeffs.items() for m in range(1, 2 * n) if c[m].terms]
            if low:
                raise SpecializationError(f"operator not d/dx below eps^{2 * n}: {low}")
        for extra in range(0, 3):
            try:
                A, gam = reduce_order(h[2 * n], n, extra, Pn)
                break
            except SpecializationError as err:
                last = err
                if "cannot be eliminated" not in str(err):
                    raise
        if gam is None:
            raise last
        standard[n] = gam
        step = MiuraMap(EpsExpansion(ring, {0: ring.v(0), 2 * n: dx(dx(A))}, order))
        h = step.substitute(h)
        if P is not None:
            P = step.transform_operator(P)
        # compose: new = old + eps^(2n) dx^2 A(old), old = total(w)
        total = total + MiuraMap._compose(EpsExpansion(ring, {2 * n: dx(dx(A))}, order),
                                          lambda m, t=total: _jet_delta(t, m), order)
        want = EpsExpansion(ring, {2 * n: sum((s * c for s, c in gam), ring.zero())}, order)
        if not densities_equivalent(EpsExpansion(ring, {2 * n: h[2 * n]}, order), want):
            raise SpecializationError(f"eps^{2 * n}: reduced density is not equivalent to its standard form")
    if P is not None:
        rest = {k: c for k, c in P.coeffs.items() if k != 1 or c != EpsExpansion.of(ring.one(), order)}
        if rest:
            raise SpecializationError("operator is not d/dx after the normal map")
    a = {}
    b = []
    for n, gam in standard.items():
        for mono, c in gam:
            if n == 1:
                a[0] = -24 * c
            elif mono == ring.v(2, n):
                a[n - 1] = c
            else:
                b.append(c)
    return NormalForm(order, standard, a, b, total, h)


def _jet_delta(total: EpsExpansion, m: int) -> EpsExpansion:
    d = total - total.ring.v(0)
    for _ in range(m):
        d = d.dx()
    return d


def tabulated_normal_map(ring: JetRing, order: int = 6, s1s2_sign: int = 1) -> EpsExpansion:
    """The tabulated normal Miura map w -> w~ through eps^6.

    The tabulated sign of the s_1 s_2/1008 term in front of (-10 w_xx^2 + w_x w_3)
    is negative; only the positive sign (the default) sends h_1 to the tabulated
    standard form.  Pass ``s1s2_sign=-1`` for the map exactly as tabulated.
    """
    s1, s2, s3 = (ring.param(f"s{k}") for k in (1, 2, 3))
    w1, w2, w3, w4 = (ring.v(k) for k in (1, 2, 3, 4))
    q = mpq
    e2 = (s1 * ring.v(0)).scale(q(1, 2))
    e4 = ((s1 ** 3).scale(q(1, 10)) + s2.scale(q(1, 48))) * w1 ** 2 + (s1 ** 2).scale(q(3, 40)) * w2
    e6 = ((s1 ** 6).scale(q(-8, 175)) + (s2 ** 2).scale(q(5, 504)) - (s1 * s3).scale(q(1, 480))
          - (s1 ** 3 * s2).scale(q(1, 21))) * w1 ** 4
    e6 = e6 + (s3.scale(q(1, 480)) + (s1 ** 2 * s2).scale(q(1, 7)) + (s1 ** 5).scale(q(48, 175))) * w1 ** 2 * w2
    e6 = e6 + ((s1 ** 4).scale(q(1, 210)) + (s1 * s2).scale(q(s1s2_sign, 1008))) * (w2 ** 2 * (-10) + w1 * w3)
    e6 = e6 + ((s1 ** 3).scale(q(17, 1680)) + s2.scale(q(1, 1008))) * w4
    coeffs = {0: ring.v(0), 2: dx(dx(e2)), 4: dx(dx(e4)), 6: dx(dx(e6))}
    return EpsExpansion(ring, {n: c for n, c in coeffs.items() if n <= order}, order)


def tabulated_normal_density(ring: JetRing, order: int = 6) -> EpsExpansion:
    """Tabulated standard form of h_1 through eps^8."""
    s1, s2, s3 = (ring.param(f"s{k}") for k in (1, 2, 3))
    w = ring.v
    q = mpq
    c = {0: w(0, 3).scale(q(1, 6)), 2: w(1, 2).scale(q(-1, 24)), 4: (s1 * w(2, 2)).scale(q(-1, 120)),
         6: -(((s1 ** 3).scale(q(1, 360)) + s2.scale(q(1, 1728))) * w(2, 3) + (s1 ** 2).scale(q(1, 420)) * w(3, 2)),
         8: -(((s1 ** 5).scale(q(2, 525)) + (s1 ** 2 * s2).scale(q(1, 504)) + s3.scale(q(1, 34560))) * w(2, 4)
              + ((s1 ** 4).scale(q(11, 1400)) + (s1 * s2).scale(q(11, 6720))) * w(2) * w(3, 2)
              + ((s1 ** 3).scale(q(1, 1260)) + s2.scale(q(1, 60480))) * w(4, 2))}
    return EpsExpansion(ring, {n: v for n, v in c.items() if n <= order}, order)


def _std_coeff(nf: NormalForm, n: int, mono: DiffPoly) -> DiffPoly:
    for m, c in nf.standard.get(n, []):
        if m == mono:
            return c
    return mono.ring.zero()


def normal_form_check(order: int = 6, recursion: HodgeRecursion | None = None) -> Report:
    """Normal form of h_1 through eps^order (6 by default, 8 also supported)."""
    if order not in (2, 4, 6, 8):
        raise ValueError("normal form check supports orders 2..8")
    rec = _default_recursion(recursion)
    pots = {g: rec.potential(g) for g in range(1, order // 2 + 1)}
    hier = Hierarchy(pots, order)
    ring = hier.ring
    nf = normal_form_h1(order, density=hier.density(1), operator=hier.operator())
    rep = Report("normal-form")
    w = ring.v
    tab = tabulated_normal_density(ring, order)
    for n in range(1, order // 2 + 1):
        for mono, c in nf.standard[n]:
            rep.add(f"h_1 eps^{2 * n} coefficient of {canonical_text(mono)[4:]}", c, tab[2 * n].terms and
                    _coeff_of(tab[2 * n], mono))
    a = nf.a
    s1, s2, s3 = (ring.param(f"s{k}") for k in (1, 2, 3))
    rep.add("a_0", a[0], ring.one())
    a0 = a[0].const_value() if a[0].is_jet_free() else None
    if order >= 4:
        rep.add("s_1 = -120 a_1", a[1].scale(-120), s1)
    if order >= 6:
        b1 = _std_coeff(nf, 3, w(3, 2))
        rep.add("b_1 = -240 a_1^2/(7 a_0)", b1, (a[1] * a[1]).scale(mpq(-240, 7) / a0))
        rep.add("s_2 = 8294400 a_1^3 - 1728 a_2", (a[1] ** 3).scale(8294400) - a[2].scale(1728), s2)
    if order >= 8:
        b2 = _std_coeff(nf, 4, w(2) * w(3, 2))
        b3 = _std_coeff(nf, 4, w(4, 2))
        rep.add("b_2 = -2376 a_1 a_2/(7 a_0)", b2, (a[1] * a[2]).scale(mpq(-2376, 7) / a0))
        rep.add("b_3 = (a_0^3 a_2 + 43200 a_1^3)/(35 a_0^2)", b3,
                (a[2].scale(a0 ** 3) + (a[1] ** 3).scale(43200)).scale(1 / (35 * a0 ** 2)))
        rep.add("s_3 = -34398535680000/7 a_1^5 + 11943936000/7 a_1^2 a_2 - 34560 a_3",
                (a[1] ** 5).scale(mpq(-34398535680000, 7)) + (a[1] ** 2 * a[2]).scale(mpq(11943936000, 7))
                - a[3].scale(34560), s3)
    # the constructed map against the tabulated one (sign-corrected, see tabulated_normal_map)
    low = min(order, 6)
    rep.add(f"constructed normal map = tabulated map through eps^{low}",
            nf.transformation.truncate(low), tabulated_normal_map(ring, low))
    # the tabulated map itself sends h_1 to the standard form and the operator to d/dx
    h6 = Hierarchy({g: pots[g] for g in range(1, low // 2 + 1)}, low)
    want = tabulated_normal_density(ring, low)

    def residues(sign: int) -> dict:
        mp = MiuraMap(tabulated_normal_map(ring, low, sign))
        mapped = mp.substitute(h6.density(1))
        Q = mp.transform_operator(h6.operator())
        extra = {k: c for k, c in Q.coeffs.items() if k != 1 or c != EpsExpansion.of(ring.one(), low)}
        return {n: variational_derivative(mapped[n] - want[n]) for n in range(0, low + 1, 2)}, extra

    dens, extra = residues(1)
    for n, resid in dens.items():
        rep.add(f"tabulated map: delta(h_1 - standard form) at eps^{n}", resid, ring.zero())
    rep.add("tabulated map: operator becomes d/dx", DiffOperator(extra), DiffOperator({}))
    if low >= 6:
        dens_t, extra_t = residues(-1)
        rep.notes.append("with the s_1 s_2/1008 sign exactly as tabulated: delta(h_1 - standard form) at eps^6 = "
                         + canonical_text(dens_t[6]) + "; operator remainder = " + _show(DiffOperator(extra_t)))
    return rep


def _coeff_of(p: DiffPoly, mono: DiffPoly) -> DiffPoly:
    """Parameter coefficient of the jet monomial ``mono`` in ``p``."""
    (k,) = mono.terms
    return _split_jets(p).get(k, p.ring.zero())
