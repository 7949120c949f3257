"""Acceptance criteria 1-12.

Each criterion prints one PASS/FAIL line (collected into the pytest terminal
summary, or printed directly when run as a script).  Every comparison is an
exact rational identity; a mismatch shows both values.
"""
from __future__ import annotations

import sys
import time
from pathlib import Path

import pytest
from gmpy2 import mpq

sys.path.insert(0, str(Path(__file__).parent))

from conftest import ACCEPTANCE_LINES, DATA  # noqa: E402
from latex_reader import load_tables, read_latex  # noqa: E402

from hodge import verify  # noqa: E402
from hodge.free_energy import check_free_energy, default_ring, fit_free_energy  # noqa: E402
from hodge.hierarchy import Hierarchy, densities_equivalent  # noqa: E402
from hodge.hodge_recursion import HodgeRecursion  # noqa: E402
from hodge.jetring import EpsExpansion, canonical_text, degbar  # noqa: E402
from hodge.lambda_extract import Extractor, bernoulli_formula_check  # noqa: E402
from hodge.specializations import (DEFAULT_CUBIC_SAMPLES, cubic_check, ilw_check, normal_form_check,  # noqa: E402
                                   volterra_check)

RING = default_ring()


def _show(x) -> str:
    if hasattr(x, "terms") and hasattr(x, "ring"):
        return canonical_text(x)
    if isinstance(x, EpsExpansion):
        return "; ".join(f"eps^{n}: {canonical_text(x[n])}" for n in range(x.order + 1) if x[n].terms) or "0"
    return str(x)


class Criterion:
    def __init__(self, number: int, title: str):
        self.number, self.title = number, title
        self.failures: list[str] = []
        self.notes: list[str] = []
        self.count = 0

    def eq(self, label: str, got, want) -> None:
        self.count += 1
        if got != want:
            self.failures.append(f"{label}: got {_show(got)} | want {_show(want)}")

    def true(self, label: str, ok: bool, detail: str = "") -> None:
        self.count += 1
        if not ok:
            self.failures.append(f"{label}: {detail}")

    def report(self, rep) -> None:
        for item in rep.items:
            self.count += 1
            if not item.ok:
                self.failures.append(f"{rep.name} {item.label}: got {item.got} | want {item.want}")
        self.notes += list(rep.notes)

    def line(self) -> str:
        head = f"{'PASS' if not self.failures else 'FAIL'} [{self.number}] {self.title} ({self.count} checks)"
        return "\n".join([head] + [f"    {f}" for f in self.failures] + [f"    note: {n}" for n in self.notes])


def _finish(c: Criterion) -> None:
    ACCEPTANCE_LINES.append(c.line())
    assert not c.failures, c.line()


# ---------------------------------------------------------------------------
# reference values (transcribed LaTeX)
# ---------------------------------------------------------------------------

F2_REF = r"\frac{v_4}{1152 v_1^2}-\frac{7 v_2 v_3}{1920 v_1^3}+\frac{v_2^3}{360 v_1^4}"
H2_EXTRA = (r"\frac{11 s_1 v_2^2}{480 v_1^2}-\frac{s_1 v_3}{40 v_1}+\frac{7}{40} s_1^2 v_2"
            r"-\frac{1}{10} s_1^3 v_1^2-\frac{1}{48} s_2 v_1^2")
MIURA_REF = {
    2: r"-\frac{1}{2} v_2 s_1-\frac{v_2^2}{24 v_1^2}+\frac{v_3}{24 v_1}",
    4: (r"\frac{v_2^5}{18 v_1^6}-\frac{35 v_2^3 v_3}{288 v_1^5}+\frac{19 v_2 v_3^2}{384 v_1^4}"
        r"+\frac{17 v_2^2 v_4}{480 v_1^4}-\frac{73 v_3 v_4}{5760 v_1^3}-\frac{41 v_2 v_5}{5760 v_1^3}"
        r"+\frac{v_6}{1152 v_1^2}+\frac{11 v_2^4 s_1}{80 v_1^4}-\frac{67 v_2^2 v_3 s_1}{240 v_1^3}"
        r"+\frac{17 v_3^2 s_1}{240 v_1^2}+\frac{23 v_2 v_4 s_1}{240 v_1^2}-\frac{v_5 s_1}{40 v_1}"
        r"+\frac{7 v_4 s_1^2}{40}-\frac{v_2^2 s_1^3}{5}-\frac{v_1 v_3 s_1^3}{5}-\frac{v_2^2 s_2}{24}"
        r"-\frac{v_1 v_3 s_2}{24}"),
}
FLOW_REF = {
    0: r"w w_1",
    2: r"\frac{w_3}{12}-w_1 w_2 s_1",
    4: (r"-\frac{w_5 s_1}{60}+w_2 w_3 s_1^2+\frac{1}{5} w_1 w_4 s_1^2-\frac{8}{5} w_1 w_2^2 s_1^3"
        r"-\frac{4}{5} w_1^2 w_3 s_1^3-\frac{1}{3} w_1 w_2^2 s_2-\frac{1}{6} w_1^2 w_3 s_2"),
}
OPERATOR_REF = {(1, 0): "1", (3, 2): "-s_1", (5, 4): r"\frac{3}{5} s_1^2"}
DENSITY_REF = {
    0: {0: r"\frac{1}{2} w^2", 2: r"-\frac{1}{2} s_1 w_1^2", 4: r"\frac{1}{5} s_1^2 w_2^2"},
    1: {0: r"\frac{1}{6} w^3", 2: r"-\frac{1}{24} w_1^2-\frac{1}{2} s_1 w w_1^2",
        4: (r"-\frac{1}{5} s_1^3 w w_1^2 w_2-\frac{1}{24} s_2 w w_1^2 w_2+\frac{1}{30} s_1 w_2^2"
            r"+\frac{1}{5} s_1^2 w w_2^2")},
}
HODGE_NUMBERS = [
    (2, (1, 1, 1), mpq(1, 2880)),
    (3, (1, 2, 3), mpq(1, 1451520)),
    (4, (2, 3, 4), mpq(1, 87091200)),
    (5, (3, 4, 5), mpq(1, 2554675200)),
    (3, (1,) * 6, mpq(1, 90720)),
    (4, (1,) * 9, mpq(1, 113400)),
    (5, (1, 2, 4, 5), mpq(1, 766402560)),
]


def rd(s: str):
    return read_latex(s, RING)


@pytest.fixture(scope="module")
def rec():
    return HodgeRecursion(RING)


@pytest.fixture(scope="module")
def ex(rec):
    return Extractor(rec)


# ---------------------------------------------------------------------------
# criteria
# ---------------------------------------------------------------------------

def test_criterion_01_genus_one():
    c = Criterion(1, "H_1 = (1/24) log v_x - s_1 v / 2, under 1 s")
    t0 = time.perf_counter()
    got = HodgeRecursion(RING).potential(1)
    dt = time.perf_counter() - t0
    c.eq("H_1", got, RING.L().scale(mpq(1, 24)) - (RING.param("s1") * RING.v(0)).scale(mpq(1, 2)))
    c.true("runtime", dt < 1, f"{dt:.2f} s")
    _finish(c)


def test_criterion_02_genus_two(rec):
    c = Criterion(2, "H_2 term by term")
    got = rec.potential(2)
    want = rd(F2_REF) + rd(H2_EXTRA)
    c.eq("H_2", got, want)
    c.eq("number of terms", len(got.terms), 8)
    _finish(c)


def test_criterion_03_free_energies():
    c = Criterion(3, "fitted F_2 equals the closed form; F_3, F_4 structural laws and exact overdetermined fit")
    t0 = time.perf_counter()
    fits = {g: fit_free_energy(g, RING) for g in (2, 3, 4)}
    dt = time.perf_counter() - t0
    c.eq("F_2", fits[2].poly, rd(F2_REF))
    for g in (3, 4):
        fe = fits[g]
        p = fe.poly
        c.eq(f"deg F_{g}", p.deg(), {2 * g - 2})
        c.true(f"degbar F_{g} <= {3 * g - 3}", degbar(p) <= 3 * g - 3, str(degbar(p)))
        c.eq(f"dF_{g}/dv", p.pdiff(0), RING.zero())
        c.true(f"F_{g} overdetermined", fe.fit["equations"] > fe.fit["unknowns"], str(fe.fit))
        c.eq(f"F_{g} residual", fe.fit["residual"], 0)
        check_free_energy(fe)
    c.true("runtime (F_2..F_4) under 10 min", dt < 600, f"{dt:.1f} s")
    _finish(c)


def test_criterion_04_generating_function_tables(ex):
    rows = load_tables(DATA / "lambda_gf_tables.txt")
    counts = {g: sum(1 for r in rows if r[0] == g) for g in (2, 3, 4)}
    c = Criterion(4, f"lambda generating-function tables, genus 2/3/4 ({counts[2]}/{counts[3]}/{counts[4]} functions)")
    t0 = time.perf_counter()
    for g, idx, expr in rows:
        if g > 4:
            continue
        c.eq(f"genus {g} lambda{idx}", ex.extract_gf(g, idx), rd(expr))
    dt = time.perf_counter() - t0
    c.eq("table sizes", counts, {2: 3, 3: 7, 4: 14})
    c.true("runtime under 15 min", dt < 900, f"{dt:.1f} s")
    _finish(c)


def test_criterion_04b_genus_five_example(ex):
    c = Criterion(4, "optional: genus-5 generating function example")
    for g, idx, expr in load_tables(DATA / "lambda_gf_tables.txt"):
        if g == 5:
            c.eq(f"genus {g} lambda{idx}", ex.extract_gf(g, idx), rd(expr))
    _finish(c)


def test_criterion_05_hodge_numbers(ex):
    c = Criterion(5, "Hodge integrals at t = 0 (genus 5 included)")
    for g, idx, want in HODGE_NUMBERS:
        c.eq(f"genus {g} lambda{idx}", ex.hodge_number(g, idx), want)
    _finish(c)


def test_criterion_06_bernoulli_formula(ex):
    c = Criterion(6, "lambda_{g-2} lambda_{g-1} lambda_g generating function, g = 2, 3, 4")
    for g in (2, 3, 4):
        ok, got, want = bernoulli_formula_check(g, ex)
        c.eq(f"genus {g}", got, want)
    _finish(c)


def test_criterion_07_hodge_hierarchy(rec):
    c = Criterion(7, "quasi-Miura map, t_1 flow, operator and first two Hamiltonians through eps^4")
    hier = Hierarchy({1: rec.potential(1), 2: rec.potential(2)}, 4)
    for n, ref in MIURA_REF.items():
        c.eq(f"quasi-Miura eps^{n}", hier.forward[n], rd(ref))
    flow = hier.flow(1)
    for n, ref in FLOW_REF.items():
        c.eq(f"t_1 flow eps^{n}", flow[n], rd(ref))
    P = hier.operator()
    got_op = {(k, n): P.coeffs[k][n] for k in P.coeffs for n in range(5) if P.coeffs[k][n].terms}
    c.eq("operator", got_op, {key: rd(v) for key, v in OPERATOR_REF.items()})
    for q, refs in DENSITY_REF.items():
        dens = hier.density(q)
        for n, ref in refs.items():
            c.true(f"H_{q} density eps^{n} modulo total derivatives", densities_equivalent(dens[n], rd(ref)),
                   f"got {canonical_text(dens[n])} | want {canonical_text(rd(ref))}")
    _finish(c)


def test_criterion_08_ilw(rec):
    c = Criterion(8, "ILW flow and operator through eps^4")
    c.report(ilw_check(4, rec))
    _finish(c)


def test_criterion_09_volterra(rec):
    c = Criterion(9, "Volterra flow through eps^2, discrete KdV agreement through eps^4")
    c.report(volterra_check(4, rec))
    _finish(c)


def test_criterion_10_cubic(rec):
    c = Criterion(10, f"cubic operator jet-free, table and closed form through eps^6 ({len(DEFAULT_CUBIC_SAMPLES)} samples)")
    t0 = time.perf_counter()
    c.report(cubic_check(6, DEFAULT_CUBIC_SAMPLES, rec))
    c.true("runtime under 30 min", time.perf_counter() - t0 < 1800)
    _finish(c)


def test_criterion_11_normal_form(rec):
    c = Criterion(11, "normal form of h_1 through eps^6 with b_1 and the s <-> a maps")
    rep = normal_form_check(6, rec)
    c.report(rep)
    _finish(c)


def test_criterion_12_property_suites():
    c = Criterion(12, "property suites")
    for chk in verify.run_core(seed=0):
        c.true(f"{chk.suite}: {chk.name}", chk.ok, chk.detail)
    _finish(c)


if __name__ == "__main__":
    sys.exit(pytest.main([__file__, "-q", "-p", "no:cacheprovider"]))
