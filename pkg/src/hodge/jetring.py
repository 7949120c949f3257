"""Differential polynomials in one dependent variable.

Elements live in Q[params][v, L, X, v2, v3, ...][v1, 1/v1].  Monomials are
packed into a single Python int: one fixed-width field per generator, with
the v1 field biased so that negative powers are representable.  Multiplying
two monomials is then one integer addition.

Field order (low bits first): params, v, v1, L, X, v2, v3, ..., vM.
"""
from __future__ import annotations

import re
from typing import Callable, Iterable, Mapping

from gmpy2 import mpq

BITS = 10
MASK = (1 << BITS) - 1
BIAS = 1 << (BITS - 1)

ZERO = mpq(0)
ONE = mpq(1)

DEFAULT_MAX_JET = 40

NEG_INF = float("-inf")


def _param_weight(name: str) -> int:
    m = re.fullmatch(r"s(\d+)", name)
    if m:
        return 2 * int(m.group(1)) - 1
    return 0


class RingError(ValueError):
    pass


class ParseError(ValueError):
    def __init__(self, msg: str, pos: int):
        super().__init__(f"{msg} at position {pos}")
        self.pos = pos


class JetRing:
    """Context for DiffPoly: parameter names, jet capacity, optional L and X.

    ``mu`` (only with ``use_X``) is the parameter polynomial with dx(X) = mu*v1*X,
    given as a mapping from parameter-exponent tuples to rationals.
    """

    def __init__(
        self,
        params: Iterable[str] = (),
        *,
        max_jet: int = DEFAULT_MAX_JET,
        use_L: bool = True,
        use_X: bool = False,
        mu: Mapping[tuple, object] | None = None,
        param_weights: Mapping[str, int] | None = None,
    ):
        self.params = tuple(params)
        for name in self.params:
            if not re.fullmatch(r"[A-Za-z][A-Za-z_]*\d*", name) or name in ("v", "L", "X") or re.fullmatch(r"v\d+", name):
                raise RingError(f"bad parameter name {name!r}")
        if len(set(self.params)) != len(self.params):
            raise RingError("duplicate parameter names")
        self.K = len(self.params)
        self.max_jet = max_jet
        self.use_L = use_L
        self.use_X = use_X
        pw = dict(param_weights or {})
        self.param_weights = tuple(pw.get(n, _param_weight(n)) for n in self.params)
        K = self.K
        self.i_v = K
        self.i_v1 = K + 1
        self.i_L = K + 2
        self.i_X = K + 3
        self.nfields = K + 3 + max_jet
        self.unit = tuple(1 << (BITS * i) for i in range(self.nfields + 1))
        self.one_key = BIAS << (BITS * self.i_v1)
        self.param_mask = (1 << (BITS * K)) - 1
        if use_X:
            if mu is None:
                raise RingError("X requires mu")
            mu_terms = []
            for exps, c in sorted(mu.items()):
                exps = tuple(exps)
                if len(exps) != K:
                    raise RingError("mu exponent tuple has wrong length")
                c = mpq(c)
                if c:
                    mu_terms.append((exps, c))
            self.mu = tuple(mu_terms)
        else:
            if mu is not None:
                raise RingError("mu given without X")
            self.mu = ()
        self._mu_keys = tuple((self._pkey(e), c) for e, c in self.mu)
        self._decode_cache: dict[int, tuple] = {}
        self._ident = (self.params, max_jet, use_L, use_X, self.mu, self.param_weights)
        self._hash = hash(self._ident)

    # -- identity -------------------------------------------------------
    def __eq__(self, other):
        return isinstance(other, JetRing) and self._ident == other._ident

    def __hash__(self):
        return self._hash

    def __repr__(self):
        return f"JetRing(params={self.params}, max_jet={self.max_jet}, use_L={self.use_L}, use_X={self.use_X})"

    def with_params(self, params: Iterable[str], **kw) -> "JetRing":
        args = dict(max_jet=self.max_jet, use_L=self.use_L, use_X=False)
        args.update(kw)
        return JetRing(params, **args)

    # -- field indices --------------------------------------------------
    def jet_field(self, m: int) -> int:
        if m == 0:
            return self.i_v
        if m == 1:
            return self.i_v1
        if m > self.max_jet:
            raise RingError(f"jet order {m} exceeds ring capacity {self.max_jet}")
        return self.K + 2 + m

    def _pkey(self, exps: tuple) -> int:
        k = self.one_key
        for i, e in enumerate(exps):
            k += e << (BITS * i)
        return k

    # -- encode / decode ------------------------------------------------
    def decode(self, key: int) -> tuple:
        """Exponent vector, v1 exponent unbiased."""
        d = self._decode_cache.get(key)
        if d is None:
            out = []
            k = key
            for _ in range(self.nfields):
                out.append(k & MASK)
                k >>= BITS
            out[self.i_v1] -= BIAS
            d = tuple(out)
            self._decode_cache[key] = d
        return d

    def encode(self, exps: Mapping[int, int] | Iterable[int]) -> int:
        if isinstance(exps, Mapping):
            items = exps.items()
        else:
            items = enumerate(exps)
        key = self.one_key
        for i, e in items:
            if not e:
                continue
            if i == self.i_v1:
                if not -BIAS <= e < BIAS:
                    raise RingError("v1 exponent out of range")
            elif not 0 <= e <= MASK:
                raise RingError("exponent out of range")
            if i == self.i_L and not self.use_L:
                raise RingError("L not enabled in this ring")
            if i == self.i_X and not self.use_X:
                raise RingError("X not enabled in this ring")
            key += e << (BITS * i)
        return key

    def jet_exps(self, key: int) -> dict:
        """Readable exponent map: {'v':e, 'v1':e, 2:e, ..., 'L':e, 'X':e, 'params':(..)}."""
        d = self.decode(key)
        out = {"params": d[: self.K]}
        out["v"] = d[self.i_v]
        out["v1"] = d[self.i_v1]
        out["L"] = d[self.i_L]
        out["X"] = d[self.i_X]
        for m in range(2, self.max_jet + 1):
            e = d[self.K + 2 + m]
            if e:
                out[m] = e
        return out

    # -- constructors ---------------------------------------------------
    def zero(self) -> "DiffPoly":
        return DiffPoly(self, {})

    def const(self, c) -> "DiffPoly":
        c = mpq(c)
        return DiffPoly(self, {self.one_key: c} if c else {})

    def one(self) -> "DiffPoly":
        return self.const(1)

    def jet(self, m: int, power: int = 1) -> "DiffPoly":
        """v^(m) raised to ``power`` (negative powers only for m = 1)."""
        if power < 0 and m != 1:
            raise RingError("only v1 may carry negative exponents")
        return DiffPoly(self, {self.encode({self.jet_field(m): power}): ONE})

    def v(self, m: int = 0, power: int = 1) -> "DiffPoly":
        return self.jet(m, power)

    def L(self) -> "DiffPoly":
        return DiffPoly(self, {self.encode({self.i_L: 1}): ONE})

    def X(self) -> "DiffPoly":
        return DiffPoly(self, {self.encode({self.i_X: 1}): ONE})

    def param(self, name: str, power: int = 1) -> "DiffPoly":
        try:
            i = self.params.index(name)
        except ValueError:
            raise RingError(f"unknown parameter {name!r}") from None
        return DiffPoly(self, {self.encode({i: power}): ONE})

    def mu_poly(self) -> "DiffPoly":
        return DiffPoly(self, {k: c for k, c in self._mu_keys})

    def monomial(self, coeff=1, *, v=0, v1=0, L=0, X=0, jets: Mapping[int, int] | None = None,
                 params: Mapping[str, int] | None = None) -> "DiffPoly":
        e: dict[int, int] = {self.i_v: v, self.i_v1: v1, self.i_L: L, self.i_X: X}
        for m, p in (jets or {}).items():
            f = self.jet_field(m)
            e[f] = e.get(f, 0) + p
        for name, p in (params or {}).items():
            e[self.params.index(name)] = p
        c = mpq(coeff)
        return DiffPoly(self, {self.encode(e): c} if c else {})

    # -- gradings -------------------------------------------------------
    def key_deg(self, key: int) -> int:
        d = self.decode(key)
        K = self.K
        return d[self.i_v1] + sum(m * d[K + 2 + m] for m in range(2, self.max_jet + 1) if d[K + 2 + m])

    def key_degbar(self, key: int) -> int:
        d = self.decode(key)
        K = self.K
        w = sum((m - 1) * d[K + 2 + m] for m in range(2, self.max_jet + 1) if d[K + 2 + m])
        return w + sum(pw * e for pw, e in zip(self.param_weights, d[:K]))

    def key_max_jet(self, key: int) -> int:
        d = self.decode(key)
        top = -1
        if d[self.i_v]:
            top = 0
        if d[self.i_v1] or d[self.i_L] or d[self.i_X]:
            top = 1
        for m in range(self.max_jet, 1, -1):
            if d[self.K + 2 + m]:
                return m
        return top

    # -- text -----------------------------------------------------------
    def factor_strings(self, key: int) -> list[str]:
        d = self.decode(key)
        out = []

        def put(name, e):
            if e == 1:
                out.append(name)
            elif e:
                out.append(f"{name}^{e}")

        for i, name in enumerate(self.params):
            put(name, d[i])
        put("v", d[self.i_v])
        put("v1", d[self.i_v1])
        for m in range(2, self.max_jet + 1):
            put(f"v{m}", d[self.K + 2 + m])
        put("L", d[self.i_L])
        put("X", d[self.i_X])
        return out

    def sort_key(self, key: int):
        d = self.decode(key)
        K = self.K
        jets = tuple(d[K + 2 + m] for m in range(self.max_jet, 1, -1))
        return (
            self.key_deg(key),
            jets,
            d[self.i_v1],
            d[self.i_v],
            d[self.i_L],
            d[self.i_X],
            tuple(d[:K]),
        )


def _coerce(ring: JetRing, x) -> "DiffPoly":
    if isinstance(x, DiffPoly):
        if x.ring is not ring and x.ring != ring:
            raise RingError("ring context mismatch")
        return x
    return ring.const(x)


class DiffPoly:
    """Immutable sparse element of a JetRing."""

    __slots__ = ("ring", "terms")

    def __init__(self, ring: JetRing, terms: dict):
        self.ring = ring
        self.terms = terms

    # -- basics ---------------------------------------------------------
    def is_zero(self) -> bool:
        return not self.terms

    def __bool__(self):
        return bool(self.terms)

    def __len__(self):
        return len(self.terms)

    def __eq__(self, other):
        if isinstance(other, DiffPoly):
            return self.ring == other.ring and self.terms == other.terms
        try:
            c = mpq(other)
        except (TypeError, ValueError):
            return NotImplemented
        return self.terms == ({self.ring.one_key: c} if c else {})

    __hash__ = None

    def __repr__(self):
        return f"DiffPoly({canonical_text(self)!r})"

    def __str__(self):
        return canonical_text(self)

    # -- arithmetic -----------------------------------------------------
    def __add__(self, other):
        other = _coerce(self.ring, other)
        if len(other.terms) > len(self.terms):
            a, b = other.terms, self.terms
        else:
            a, b = self.terms, other.terms
        res = dict(a)
        for k, c in b.items():
            s = res.get(k)
            if s is None:
                res[k] = c
            else:
                s = s + c
                if s:
                    res[k] = s
                else:
                    del res[k]
        return DiffPoly(self.ring, res)

    __radd__ = __add__

    def __neg__(self):
        return DiffPoly(self.ring, {k: -c for k, c in self.terms.items()})

    def __sub__(self, other):
        return self + (-_coerce(self.ring, other))

    def __rsub__(self, other):
        return _coerce(self.ring, other) + (-self)

    def scale(self, c) -> "DiffPoly":
        c = mpq(c)
        if not c:
            return DiffPoly(self.ring, {})
        if c == 1:
            return self
        return DiffPoly(self.ring, {k: v * c for k, v in self.terms.items()})

    def __mul__(self, other):
        if not isinstance(other, DiffPoly):
            try:
                return self.scale(other)
            except (TypeError, ValueError):
                return NotImplemented
        other = _coerce(self.ring, other)
        a, b = self.terms, other.terms
        if len(a) > len(b):
            a, b = b, a
        if not a:
            return DiffPoly(self.ring, {})
        one = self.ring.one_key
        res: dict = {}
        get = res.get
        bitems = list(b.items())
        for k1, c1 in a.items():
            off = k1 - one
            for k2, c2 in bitems:
                k = k2 + off
                s = get(k)
                res[k] = c1 * c2 if s is None else s + c1 * c2
        return DiffPoly(self.ring, {k: c for k, c in res.items() if c})

    def __rmul__(self, other):
        return self.__mul__(other)

    def __truediv__(self, other):
        return self.scale(ONE / mpq(other))

    def __pow__(self, n: int):
        if n < 0:
            if len(self.terms) == 1:
                ((k, c),) = self.terms.items()
                d = self.ring.decode(k)
                nonv1 = [e for i, e in enumerate(d) if i != self.ring.i_v1 and e]
                if not nonv1:
                    return DiffPoly(self.ring, {self.ring.encode({self.ring.i_v1: d[self.ring.i_v1] * n}): c ** n})
            raise RingError("negative power of a non-monomial")
        result = self.ring.one()
        base = self
        while n:
            if n & 1:
                result = result * base
            n >>= 1
            if n:
                base = base * base
        return result

    # -- structure ------------------------------------------------------
    def dx(self) -> "DiffPoly":
        return dx(self)

    def pdiff(self, m: int) -> "DiffPoly":
        return pdiff(self, m)

    def deg(self):
        return deg(self)

    def degbar(self):
        return degbar(self)

    def max_jet(self) -> int:
        return max((self.ring.key_max_jet(k) for k in self.terms), default=-1)

    def coeff_param_power(self, name: str, j: int) -> "DiffPoly":
        """Coefficient of name^j, as a polynomial free of ``name``."""
        i = self.ring.params.index(name)
        sh = BITS * i
        out = {}
        for k, c in self.terms.items():
            if (k >> sh) & MASK == j:
                out[k - (j << sh)] = c
        return DiffPoly(self.ring, out)

    def param_degree(self, name: str) -> int:
        i = self.ring.params.index(name)
        sh = BITS * i
        return max(((k >> sh) & MASK for k in self.terms), default=-1)

    def split_params(self) -> dict:
        """Map param-part key -> jet-only DiffPoly."""
        r = self.ring
        pm = r.param_mask
        out: dict = {}
        for k, c in self.terms.items():
            pk = k & pm
            out.setdefault(pk, {})[k - pk] = c
        return {pk: DiffPoly(r, t) for pk, t in out.items()}

    def is_const(self) -> bool:
        return not self.terms or (len(self.terms) == 1 and self.ring.one_key in self.terms)

    def const_value(self):
        if not self.terms:
            return ZERO
        if self.is_const():
            return self.terms[self.ring.one_key]
        raise RingError("not a constant")

    def is_jet_free(self) -> bool:
        """True when only parameters appear."""
        r = self.ring
        jm = ~r.param_mask
        return all((k & jm) == r.one_key for k in self.terms)

    def sorted_terms(self):
        r = self.ring
        return sorted(self.terms.items(), key=lambda kc: r.sort_key(kc[0]))


# ---------------------------------------------------------------------------
# derivations
# ---------------------------------------------------------------------------

def dx(a: DiffPoly) -> DiffPoly:
    r = a.ring
    u = r.unit
    K = r.K
    iv, i1, iL, iX = r.i_v, r.i_v1, r.i_L, r.i_X
    one = r.one_key
    M = r.max_jet
    res: dict = {}
    get = res.get

    def put(k, c):
        s = get(k)
        res[k] = c if s is None else s + c

    for k, c in a.terms.items():
        d = r.decode(k)
        e = d[iv]
        if e:
            put(k - u[iv] + u[i1], c * e)
        e = d[i1]
        if e:
            put(k - u[i1] + u[K + 4], c * e)
        e = d[iL]
        if e:
            put(k - u[iL] - u[i1] + u[K + 4], c * e)
        e = d[iX]
        if e:
            for mk, mc in r._mu_keys:
                put(k + mk - one + u[i1], c * e * mc)
        for m in range(2, M + 1):
            e = d[K + 2 + m]
            if e:
                if m == M:
                    raise RingError(f"dx exceeds jet capacity {M}")
                put(k - u[K + 2 + m] + u[K + 3 + m], c * e)
    return DiffPoly(r, {k: c for k, c in res.items() if c})


def dx_n(a: DiffPoly, n: int) -> DiffPoly:
    for _ in range(n):
        a = dx(a)
    return a


def pdiff(a: DiffPoly, m: int) -> DiffPoly:
    """Partial derivative in v^(m), jets treated as independent."""
    r = a.ring
    u = r.unit
    one = r.one_key
    res: dict = {}
    get = res.get

    def put(k, c):
        s = get(k)
        res[k] = c if s is None else s + c

    if m == 0:
        iv, iX = r.i_v, r.i_X
        for k, c in a.terms.items():
            d = r.decode(k)
            if d[iv]:
                put(k - u[iv], c * d[iv])
            if d[iX]:
                for mk, mc in r._mu_keys:
                    put(k + mk - one, c * d[iX] * mc)
    elif m == 1:
        i1, iL = r.i_v1, r.i_L
        for k, c in a.terms.items():
            d = r.decode(k)
            if d[i1]:
                put(k - u[i1], c * d[i1])
            if d[iL]:
                put(k - u[iL] - u[i1], c * d[iL])
    else:
        if m > r.max_jet:
            return r.zero()
        f = r.jet_field(m)
        sh = BITS * f
        for k, c in a.terms.items():
            e = (k >> sh) & MASK
            if e:
                put(k - u[f], c * e)
    return DiffPoly(r, {k: c for k, c in res.items() if c})


def pdiff_param(a: DiffPoly, name: str) -> DiffPoly:
    r = a.ring
    i = r.params.index(name)
    sh = BITS * i
    out = {}
    for k, c in a.terms.items():
        e = (k >> sh) & MASK
        if e:
            out[k - r.unit[i]] = c * e
    return DiffPoly(r, out)


def deg(a: DiffPoly):
    """Set of deg values (the polynomial is homogeneous iff it has one element)."""
    return {a.ring.key_deg(k) for k in a.terms}


def degbar(a: DiffPoly):
    if not a.terms:
        return NEG_INF
    return max(a.ring.key_degbar(k) for k in a.terms)


# ---------------------------------------------------------------------------
# ring maps
# ---------------------------------------------------------------------------

def convert(a: DiffPoly, target: JetRing, param_map: Mapping[str, str] | None = None) -> DiffPoly:
    """Re-express ``a`` in ``target`` (parameters matched by name)."""
    src = a.ring
    if src == target:
        return a
    pm = dict(param_map or {})
    idx = []
    for i, name in enumerate(src.params):
        tname = pm.get(name, name)
        idx.append(target.params.index(tname) if tname in target.params else None)
    out: dict = {}
    for k, c in a.terms.items():
        d = src.decode(k)
        e: dict[int, int] = {}
        for i in range(src.K):
            if d[i]:
                if idx[i] is None:
                    raise RingError(f"parameter {src.params[i]!r} missing in target ring")
                e[idx[i]] = e.get(idx[i], 0) + d[i]
        e[target.i_v] = d[src.i_v]
        e[target.i_v1] = d[src.i_v1]
        e[target.i_L] = d[src.i_L]
        e[target.i_X] = d[src.i_X]
        for m in range(2, src.max_jet + 1):
            x = d[src.K + 2 + m]
            if x:
                e[target.jet_field(m)] = x
        nk = target.encode(e)
        s = out.get(nk, ZERO) + c
        if s:
            out[nk] = s
        else:
            out.pop(nk, None)
    return DiffPoly(target, out)


def subs_params(a: DiffPoly, target: JetRing, images: Mapping[str, DiffPoly]) -> DiffPoly:
    """Substitute each parameter of ``a.ring`` by a jet-free element of ``target``.

    Parameters without an image must exist in ``target`` and are kept.
    """
    src = a.ring
    imgs = []
    for name in src.params:
        if name in images:
            im = images[name]
            imgs.append(_coerce(target, im) if isinstance(im, DiffPoly) else target.const(im))
        else:
            imgs.append(target.param(name))
    pow_cache: dict = {}

    def ppow(i, e):
        key = (i, e)
        p = pow_cache.get(key)
        if p is None:
            p = imgs[i] if e == 1 else ppow(i, e - 1) * imgs[i]
            pow_cache[key] = p
        return p

    groups: dict = {}
    pmask = src.param_mask
    for k, c in a.terms.items():
        pk = k & pmask
        groups.setdefault(pk, {})[k - pk] = c
    result = target.zero()
    for pk, jterms in groups.items():
        d = src.decode(pk + src.one_key)
        coef = target.one()
        for i in range(src.K):
            if d[i]:
                coef = coef * ppow(i, d[i])
        if coef.terms:
            result = result + coef * convert(DiffPoly(src, jterms), target)
    return result


# ---------------------------------------------------------------------------
# canonical text
# ---------------------------------------------------------------------------

def _fmt_rat(c) -> str:
    c = mpq(c)
    if c.denominator == 1:
        return str(c.numerator)
    return f"{c.numerator}/{c.denominator}"


def canonical_text(a: DiffPoly) -> str:
    if not a.terms:
        return "0"
    parts = []
    for i, (k, c) in enumerate(a.sorted_terms()):
        sign = "-" if c < 0 else "+"
        body = "(" + _fmt_rat(abs(c)) + ")"
        fs = a.ring.factor_strings(k)
        if fs:
            body += "*" + "*".join(fs)
        if i == 0:
            parts.append(("-" if sign == "-" else "") + body)
        else:
            parts.append(f" {sign} {body}")
    return "".join(parts)


_TOKEN = re.compile(r"\s*(?:(\()|(\))|(\*)|(\^)|([+-])|(\d+(?:/\d+)?)|([A-Za-z][A-Za-z_]*\d*))")


def parse(text: str, ring: JetRing) -> DiffPoly:
    """Inverse of canonical_text. Whitespace-insensitive."""
    toks = []
    pos = 0
    n = len(text)
    while pos < n:
        if text[pos].isspace():
            pos += 1
            continue
        m = _TOKEN.match(text, pos)
        if not m or m.end() == pos:
            raise ParseError(f"unexpected character {text[pos]!r}", pos)
        start = m.start(m.lastindex)
        toks.append((m.lastindex, m.group(m.lastindex), start))
        pos = m.end()
    toks.append((0, "", n))
    i = 0

    def peek():
        return toks[i]

    def take(kind=None):
        nonlocal i
        t = toks[i]
        if kind is not None and t[0] != kind:
            raise ParseError(f"expected {_KIND[kind]}, got {t[1]!r}" if t[1] else f"expected {_KIND[kind]}, got end of input", t[2])
        i += 1
        return t

    def signed_int():
        sign = 1
        if peek()[0] == 5:
            sign = -1 if take()[1] == "-" else 1
        t = take(6)
        if "/" in t[1]:
            raise ParseError("exponent must be an integer", t[2])
        return sign * int(t[1])

    result: dict = {}
    if peek()[0] == 6 and peek()[1] == "0" and toks[i + 1][0] == 0:
        return ring.zero()
    first = True
    while True:
        sign = 1
        t = peek()
        if t[0] == 5:
            take()
            sign = -1 if t[1] == "-" else 1
        elif not first:
            raise ParseError("expected '+' or '-'", t[2])
        if peek()[0] == 1:
            take(1)
            inner_sign = 1
            if peek()[0] == 5:
                inner_sign = -1 if take()[1] == "-" else 1
            num = take(6)
            take(2)
            coeff = mpq(num[1]) * inner_sign * sign
            have_coeff = True
        else:
            coeff = mpq(sign)
            have_coeff = False
        exps: dict[int, int] = {}
        need_factor = not have_coeff
        while need_factor or peek()[0] == 3:
            if not need_factor:
                take(3)
            need_factor = False
            name_t = take(7)
            name = name_t[1]
            e = 1
            if peek()[0] == 4:
                take(4)
                e = signed_int()
            try:
                f = _factor_field(ring, name)
            except RingError as err:
                raise ParseError(str(err), name_t[2]) from None
            exps[f] = exps.get(f, 0) + e
        for f, e in exps.items():
            if e < 0 and f != ring.i_v1:
                raise ParseError("negative exponent on a generator other than v1", t[2])
        try:
            key = ring.encode(exps)
        except RingError as err:
            raise ParseError(str(err), t[2]) from None
        s = result.get(key, ZERO) + coeff
        if s:
            result[key] = s
        else:
            result.pop(key, None)
        first = False
        if peek()[0] == 0:
            break
    return DiffPoly(ring, result)


_KIND = {1: "'('", 2: "')'", 3: "'*'", 4: "'^'", 5: "sign", 6: "number", 7: "name"}


def _factor_field(ring: JetRing, name: str) -> int:
    if name in ring.params:
        return ring.params.index(name)
    if name == "v":
        return ring.i_v
    if name == "L":
        if not ring.use_L:
            raise RingError("L not enabled")
        return ring.i_L
    if name == "X":
        if not ring.use_X:
            raise RingError("X not enabled")
        return ring.i_X
    m = re.fullmatch(r"v(\d+)", name)
    if m:
        return ring.jet_field(int(m.group(1)))
    raise RingError(f"unknown symbol {name!r}")


def to_json(a: DiffPoly) -> list:
    """Term list [[coeff, {factor: exp}], ...] in canonical order."""
    out = []
    for k, c in a.sorted_terms():
        fac = {}
        for f in a.ring.factor_strings(k):
            if "^" in f:
                n, e = f.split("^")
                fac[n] = int(e)
            else:
                fac[f] = 1
        out.append([_fmt_rat(c), fac])
    return out


def from_json(data: list, ring: JetRing) -> DiffPoly:
    res: dict = {}
    for c, fac in data:
        e: dict[int, int] = {}
        for name, p in fac.items():
            f = _factor_field(ring, name)
            e[f] = e.get(f, 0) + p
        k = ring.encode(e)
        s = res.get(k, ZERO) + mpq(c)
        if s:
            res[k] = s
        else:
            res.pop(k, None)
    return DiffPoly(ring, res)


# ---------------------------------------------------------------------------
# epsilon expansions
# ---------------------------------------------------------------------------

class EpsExpansion:
    """sum_n eps^n c_n with DiffPoly coefficients, known through eps^order."""

    __slots__ = ("ring", "coeffs", "order")

    def __init__(self, ring: JetRing, coeffs: Mapping[int, DiffPoly] | None = None, order: int = 0):
        self.ring = ring
        self.order = order
        self.coeffs = {n: c for n, c in (coeffs or {}).items() if n <= order and c.terms}

    @classmethod
    def of(cls, p: DiffPoly, order: int) -> "EpsExpansion":
        return cls(p.ring, {0: p}, order)

    def __getitem__(self, n: int) -> DiffPoly:
        if n > self.order:
            raise IndexError(f"eps^{n} is beyond the truncation order {self.order}")
        return self.coeffs.get(n, self.ring.zero())

    def __repr__(self):
        body = ", ".join(f"eps^{n}: {canonical_text(c)}" for n, c in sorted(self.coeffs.items()))
        return f"EpsExpansion({body}; O(eps^{self.order + 1}))"

    def is_zero(self) -> bool:
        return not self.coeffs

    def __bool__(self):
        return bool(self.coeffs)

    def __eq__(self, other):
        if isinstance(other, EpsExpansion):
            N = min(self.order, other.order)
            return all(self.coeffs.get(n, self.ring.zero()) == other.coeffs.get(n, other.ring.zero())
                       for n in range(N + 1))
        return NotImplemented

    __hash__ = None

    def truncate(self, order: int) -> "EpsExpansion":
        return EpsExpansion(self.ring, self.coeffs, min(order, self.order))

    def shift(self, n: int, order: int | None = None) -> "EpsExpansion":
        """Multiply by eps^n."""
        o = self.order + n if order is None else order
        return EpsExpansion(self.ring, {k + n: c for k, c in self.coeffs.items()}, o)

    def is_even(self) -> bool:
        return all(n % 2 == 0 for n in self.coeffs)

    def _coerce(self, other):
        if isinstance(other, EpsExpansion):
            return other
        if isinstance(other, DiffPoly):
            return EpsExpansion(self.ring, {0: other}, self.order)
        return EpsExpansion(self.ring, {0: self.ring.const(other)}, self.order)

    def __add__(self, other):
        other = self._coerce(other)
        N = min(self.order, other.order)
        out = {n: c for n, c in self.coeffs.items() if n <= N}
        for n, c in other.coeffs.items():
            if n <= N:
                out[n] = out[n] + c if n in out else c
        return EpsExpansion(self.ring, out, N)

    __radd__ = __add__

    def __neg__(self):
        return EpsExpansion(self.ring, {n: -c for n, c in self.coeffs.items()}, self.order)

    def __sub__(self, other):
        return self + (-self._coerce(other))

    def __rsub__(self, other):
        return self._coerce(other) - self

    def scale(self, c) -> "EpsExpansion":
        if isinstance(c, DiffPoly):
            return EpsExpansion(self.ring, {n: x * c for n, x in self.coeffs.items()}, self.order)
        return EpsExpansion(self.ring, {n: x.scale(c) for n, x in self.coeffs.items()}, self.order)

    def __mul__(self, other):
        if not isinstance(other, EpsExpansion):
            return self.scale(other)
        N = min(self.order, other.order)
        out: dict = {}
        for i, a in self.coeffs.items():
            for j, b in other.coeffs.items():
                if i + j <= N:
                    p = a * b
                    out[i + j] = out[i + j] + p if i + j in out else p
        return EpsExpansion(self.ring, out, N)

    __rmul__ = __mul__

    def map(self, fn: Callable[[DiffPoly], DiffPoly]) -> "EpsExpansion":
        return EpsExpansion(self.ring, {n: fn(c) for n, c in self.coeffs.items()}, self.order)

    def dx(self) -> "EpsExpansion":
        return self.map(dx)

    def pdiff(self, m: int) -> "EpsExpansion":
        return self.map(lambda c: pdiff(c, m))

    def max_jet(self) -> int:
        return max((c.max_jet() for c in self.coeffs.values()), default=-1)


def taylor_compose(f: DiffPoly, delta: Callable[[int], EpsExpansion], order: int) -> EpsExpansion:
    """f(v + delta_0, v_1 + delta_1, ...) through eps^order.

    Every delta_m must vanish at eps^0 and eps^1, so the Taylor series
    sum_alpha (d^alpha f) delta^alpha / alpha! terminates at |alpha| = order/2.
    L and X are handled through pdiff (d/dv_1 L = 1/v_1, d/dv X = mu X).
    """
    ring = f.ring
    acc: dict = {0: f} if f.terms else {}

    def add(prod: EpsExpansion, poly: DiffPoly, c):
        for n, d in prod.coeffs.items():
            t = (d * poly).scale(c)
            acc[n] = acc[n] + t if n in acc else t

    def dfs(poly: DiffPoly, start: int, prod, depth: int, last: int, run: int, coef):
        top = poly.max_jet()
        for m in range(start, top + 1):
            dp = pdiff(poly, m)
            if not dp.terms:
                continue
            d = delta(m).truncate(order)
            if not d.coeffs:
                continue
            r = run + 1 if m == last else 1
            c = coef / r
            nprod = d if prod is None else prod * d
            if not nprod.coeffs:
                continue
            add(nprod, dp, c)
            if 2 * (depth + 2) <= order:
                dfs(dp, m, nprod, depth + 1, m, r, c)

    if order >= 2 and f.terms:
        dfs(f, 0, None, 0, -1, 0, ONE)
    return EpsExpansion(ring, acc, order)
