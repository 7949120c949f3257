"""Reads the simple LaTeX formulas used as frozen reference data."""
from __future__ import annotations

from gmpy2 import mpq

from hodge.jetring import DiffPoly, JetRing


def _group(s: str, i: int) -> tuple[str, int]:
    assert s[i] == "{", s[i:]
    depth = 0
    for j in range(i, len(s)):
        if s[j] == "{":
            depth += 1
        elif s[j] == "}":
            depth -= 1
            if depth == 0:
                return s[i + 1:j], j + 1
    raise ValueError("unbalanced braces")


def _num_or_group(s: str, i: int) -> tuple[str, int]:
    if s[i] == "{":
        return _group(s, i)
    j = i + 1 if s[i] != "-" else i + 2
    while j < len(s) and s[j].isdigit() and s[i].isdigit():
        j += 1
    return s[i:j], j


def _product(s: str, ring: JetRing):
    coef = mpq(1)
    exps: dict = {}
    i = 0
    s = s.replace("\\left", "").replace("\\right", "")
    while i < len(s):
        c = s[i]
        if c.isspace() or c in "()":
            i += 1
        elif s.startswith("\\frac", i):
            a, i = _group(s, i + 5)
            b, i = _group(s, i)
            ca, ea = _product(a, ring)
            cb, eb = _product(b, ring)
            coef *= ca / cb
            for k, e in ea.items():
                exps[k] = exps.get(k, 0) + e
            for k, e in eb.items():
                exps[k] = exps.get(k, 0) - e
        elif c.isdigit():
            j = i
            while j < len(s) and s[j].isdigit():
                j += 1
            coef *= int(s[i:j])
            i = j
        elif c in "vw" or c in "s":
            name = c
            i += 1
            idx = 0
            if i < len(s) and s[i] == "_":
                t, i = _num_or_group(s, i + 1)
                idx = int(t)
            e = 1
            if i < len(s) and s[i] == "^":
                t, i = _num_or_group(s, i + 1)
                e = int(t)
            if name == "s":
                field = ring.params.index(f"s{idx}")
            else:
                field = ring.jet_field(idx)
            exps[field] = exps.get(field, 0) + e
        else:
            raise ValueError(f"cannot read {s[i:]!r}")
    return coef, exps


def read_latex(s: str, ring: JetRing) -> DiffPoly:
    terms = []
    depth = 0
    start = 0
    for i, c in enumerate(s):
        if c == "{":
            depth += 1
        elif c == "}":
            depth -= 1
        elif c in "+-" and depth == 0 and i > start:
            terms.append(s[start:i])
            start = i
    terms.append(s[start:])
    out = ring.zero()
    for t in terms:
        t = t.strip()
        sign = 1
        if t.startswith("-"):
            sign, t = -1, t[1:]
        elif t.startswith("+"):
            t = t[1:]
        c, e = _product(t, ring)
        out = out + DiffPoly(ring, {ring.encode(e): c * sign})
    return out


def load_tables(path) -> list[tuple[int, tuple, str]]:
    out = []
    for line in open(path, encoding="utf-8"):
        line = line.strip()
        if not line:
            continue
        g, idx, expr = line.split("|", 2)
        out.append((int(g), tuple(int(x) for x in idx.split(",")), expr))
    return out
