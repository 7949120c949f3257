"""Text, JSON and LaTeX renderings of results."""
from __future__ import annotations

import json
import re
from importlib import resources

from gmpy2 import mpq

from .jetring import DiffPoly, EpsExpansion, canonical_text, to_json

SCHEMA_ID = "hodge-output/1"

TERMS_PER_LINE = 4


# ---------------------------------------------------------------------------
# JSON
# ---------------------------------------------------------------------------

def rat_text(c) -> str:
    c = mpq(c)
    return str(c.numerator) if c.denominator == 1 else f"{c.numerator}/{c.denominator}"


def poly_json(p: DiffPoly) -> dict:
    return {"text": canonical_text(p), "terms": to_json(p)}


def eps_json(e: EpsExpansion) -> dict:
    return {"order": e.order, "coefficients": {str(n): poly_json(e[n]) for n in range(e.order + 1) if e[n].terms}}


def operator_json(P, order: int) -> dict:
    return {"order": order, "terms": {str(k): eps_json(c) for k, c in sorted(P.coeffs.items())}}


def report_json(rep) -> dict:
    return {"name": rep.name, "ok": rep.ok,
            "items": [{"label": i.label, "ok": i.ok, "got": i.got, "want": i.want} for i in rep.items],
            "notes": list(rep.notes)}


def envelope(command: str, args: dict, result: dict, ok: bool = True) -> dict:
    return {"schema": SCHEMA_ID, "command": command, "args": args, "status": "ok" if ok else "fail", "result": result}


def dumps(doc: dict) -> str:
    return json.dumps(doc, indent=2, sort_keys=True)


def load_schema() -> dict:
    return json.loads(resources.files("hodge").joinpath("output_schema.json").read_text(encoding="utf-8"))


# ---------------------------------------------------------------------------
# LaTeX
# ---------------------------------------------------------------------------

def _latex_param(name: str) -> str:
    m = re.fullmatch(r"([A-Za-z]+)(\d*)", name)
    base, idx = m.group(1), m.group(2)
    if base in ("sigma", "mu", "lambda", "epsilon"):
        base = "\\" + base
    return f"{base}_{{{idx}}}" if idx else base


def _pow(base: str, e: int) -> str:
    if e == 1:
        return base
    return f"{base}^{{{e}}}"


def _mu_latex(ring) -> str:
    parts = []
    for exps, c in ring.mu:
        fac = " ".join(_pow(_latex_param(n), e) for n, e in zip(ring.params, exps) if e)
        parts.append((rat_text(c) if c != 1 or not fac else "") + fac)
    return "+".join(parts) if len(parts) == 1 else "(" + "+".join(parts) + ")"


def _monomial_latex(ring, key: int, var: str) -> str:
    d = ring.decode(key)
    out = []
    for i, name in enumerate(ring.params):
        if d[i]:
            out.append(_pow(_latex_param(name), d[i]))
    if d[ring.i_v]:
        out.append(_pow(var, d[ring.i_v]))
    if d[ring.i_v1]:
        out.append(_pow(f"{var}_{{1}}", d[ring.i_v1]))
    for m in range(2, ring.max_jet + 1):
        e = d[ring.K + 2 + m]
        if e:
            out.append(_pow(f"{var}_{{{m}}}", e))
    if d[ring.i_L]:
        out.append(_pow(f"\\log {var}_{{1}}", d[ring.i_L]) if d[ring.i_L] == 1 else f"(\\log {var}_{{1}})^{{{d[ring.i_L]}}}")
    if d[ring.i_X]:
        mu = _mu_latex(ring)
        out.append(f"e^{{{d[ring.i_X] if d[ring.i_X] != 1 else ''}{mu} {var}}}")
    return " ".join(out)


def _coeff_latex(c) -> tuple[str, str]:
    """(sign, magnitude) with magnitude '' meaning 1."""
    c = mpq(c)
    sign = "-" if c < 0 else "+"
    c = abs(c)
    if c == 1:
        return sign, ""
    if c.denominator == 1:
        return sign, str(c.numerator)
    return sign, f"\\frac{{{c.numerator}}}{{{c.denominator}}}"


def term_strings(p: DiffPoly, var: str = "v") -> list[str]:
    """Signed LaTeX terms in canonical order."""
    out = []
    for k, c in p.sorted_terms():
        sign, mag = _coeff_latex(c)
        mono = _monomial_latex(p.ring, k, var)
        body = (mag + " " + mono).strip() if mono else (mag or "1")
        out.append(f"{sign} {body}")
    return out


def poly_latex(p: DiffPoly, var: str = "v") -> str:
    terms = term_strings(p, var)
    if not terms:
        return "0"
    s = " ".join(terms)
    return s[2:] if s.startswith("+ ") else s


def _chunks(terms: list[str], n: int = TERMS_PER_LINE) -> list[str]:
    lines = [" ".join(terms[i:i + n]) for i in range(0, len(terms), n)]
    if lines and lines[0].startswith("+ "):
        lines[0] = lines[0][2:]
    return lines


def equation_lines(lhs: str, terms: list[str]) -> list[str]:
    """align* rows for lhs = sum of terms, wrapped."""
    lines = _chunks(terms) or ["0"]
    rows = [f"{lhs} &= {lines[0]}"]
    rows += [f"&\\quad {ln}" for ln in lines[1:]]
    return rows


def eps_terms(e: EpsExpansion, var: str = "v") -> list[str]:
    out = []
    for n in range(e.order + 1):
        c = e[n]
        if not c.terms:
            continue
        body = poly_latex(c, var)
        if n == 0:
            out.extend(term_strings(c, var))
        else:
            out.append(f"+ \\epsilon^{{{n}}}\\left({body}\\right)")
    return out


def operator_terms(P, var: str = "w") -> list[str]:
    out = []
    for k, c in sorted(P.coeffs.items()):
        d = "\\partial_x" if k == 1 else f"\\partial_x^{{{k}}}"
        for n in range(c.order + 1):
            cn = c[n]
            if not cn.terms:
                continue
            eps = "" if n == 0 else f"\\epsilon^{{{n}}}"
            if len(cn.terms) == 1 and cn.is_jet_free():
                ((key, val),) = cn.terms.items()
                sign, mag = _coeff_latex(val)
                mono = _monomial_latex(cn.ring, key, var)
                out.append(f"{sign} {mag} {eps} {mono} {d}".replace("  ", " "))
            else:
                out.append(f"+ {eps}\\left({poly_latex(cn, var)}\\right) {d}")
    return out


def latex_document(title: str, blocks: list[list[str]], notes: list[str] | None = None) -> str:
    """Standalone document; each block is a list of align* rows."""
    body = [
        "\\documentclass{article}",
        "\\usepackage{amsmath}",
        "\\usepackage[margin=2cm]{geometry}",
        "\\allowdisplaybreaks",
        "\\begin{document}",
        f"\\section*{{{_escape(title)}}}",
    ]
    for rows in blocks:
        body.append("\\begin{align*}")
        body.append(" \\\\\n".join(rows))
        body.append("\\end{align*}")
    for n in notes or []:
        body.append(_escape(n) + "\n")
    body.append("\\end{document}")
    return "\n".join(body) + "\n"


def _escape(s: str) -> str:
    return (s.replace("\\", "\\textbackslash{}").replace("_", "\\_").replace("^", "\\^{}")
            .replace("&", "\\&").replace("%", "\\%").replace("#", "\\#"))


def text_table(rows: list[tuple]) -> str:
    width = max((len(str(r[0])) for r in rows), default=0)
    return "\n".join(f"{str(a).ljust(width)}  {b}" for a, b in rows)
