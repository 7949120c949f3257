"""Command-line front end.

Exit codes: 0 success, 1 a verification failed, 2 usage or input error.
"""
from __future__ import annotations

import argparse
import os
import sys
from typing import Sequence

from gmpy2 import mpq

from . import emit
from .cache import ENV_VAR, Store, default_cache_dir
from .free_energy import bernoulli, default_ring, free_energy
from .hierarchy import Hierarchy
from .hodge_recursion import HodgeRecursion, check_table, hodge_potential
from .jetring import EpsExpansion, canonical_text, parse

EXIT_OK, EXIT_FAIL, EXIT_USAGE = 0, 1, 2


class UsageError(ValueError):
    pass


# ---------------------------------------------------------------------------
# helpers
# ---------------------------------------------------------------------------

def _int_list(text: str) -> tuple:
    text = text.strip()
    if not text:
        return ()
    try:
        vals = tuple(int(x) for x in text.split(","))
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected comma-separated integers, got {text!r}") from None
    if any(v < 0 for v in vals):
        raise argparse.ArgumentTypeError("indices must be nonnegative")
    return vals


def _samples(text: str) -> list:
    out = []
    for part in text.split(";"):
        part = part.strip()
        if not part:
            continue
        try:
            p, q = (mpq(x) for x in part.split(","))
        except ValueError:
            raise argparse.ArgumentTypeError(f"bad sample {part!r}; use p,q;p,q") from None
        if p + q == 0:
            raise argparse.ArgumentTypeError(f"sample {part!r} has p + q = 0")
        out.append((p, q))
    if not out:
        raise argparse.ArgumentTypeError("no samples given")
    return out


def _even_order(text: str) -> int:
    try:
        k = int(text)
    except ValueError:
        raise argparse.ArgumentTypeError("order must be an integer") from None
    if k < 0 or k % 2:
        raise argparse.ArgumentTypeError("order must be a nonnegative even integer")
    return k


def _store(args) -> Store | None:
    if args.no_cache:
        return None
    return Store(args.cache_dir)


def _recursion(args) -> HodgeRecursion:
    return HodgeRecursion(default_ring(), store=_store(args))


def _eps_text(e: EpsExpansion) -> str:
    lines = [f"eps^{n}: {canonical_text(e[n])}" for n in range(e.order + 1) if e[n].terms]
    return "\n".join(lines) or "0"


def _operator_text(P) -> str:
    lines = []
    for k, c in sorted(P.coeffs.items()):
        for n in range(c.order + 1):
            if c[n].terms:
                lines.append(f"d^{k} eps^{n}: {canonical_text(c[n])}")
    return "\n".join(lines) or "0"


def _cached_eps(store, kind: str, key: dict, ring, build) -> EpsExpansion:
    """Cache every eps coefficient of an expansion as canonical text."""
    if store is not None:
        text = store.get_text(kind, key)
        if text is not None:
            coeffs = {}
            order = key["order"]
            for line in text.splitlines():
                n, body = line.split(":", 1)
                coeffs[int(n)] = parse(body.strip(), ring)
            return EpsExpansion(ring, coeffs, order)
    e = build()
    if store is not None:
        store.put_text(kind, key, "\n".join(f"{n}: {canonical_text(e[n])}" for n in range(e.order + 1)))
    return e


def _out(args, command: str, *, text: str, result: dict, latex: list | None = None, title: str = "",
         ok: bool = True, notes: list | None = None) -> int:
    fmt = args.format
    if fmt == "json":
        jargs = {k: (v if isinstance(v, (int, str, bool, type(None))) else str(v))
                 for k, v in sorted(vars(args).items()) if k not in ("func", "cache_dir", "no_cache")}
        print(emit.dumps(emit.envelope(command, jargs, result, ok)))
    elif fmt == "latex":
        print(emit.latex_document(title or command, latex or [], notes), end="")
    else:
        print(text)
    return EXIT_OK if ok else EXIT_FAIL


# ---------------------------------------------------------------------------
# commands
# ---------------------------------------------------------------------------

def cmd_bernoulli(args) -> int:
    b = bernoulli(args.n)
    t = emit.rat_text(b)
    sign, mag = emit._coeff_latex(b)
    rhs = ("-" if sign == "-" else "") + (mag or "1") if b else "0"
    return _out(args, "bernoulli", text=t, result={"value": t},
                latex=[[f"B_{{{args.n}}} &= {rhs}"]], title="Bernoulli number")


def cmd_free_energy(args) -> int:
    ring = default_ring()
    fe = free_energy(args.genus, ring, refit=args.refit, store=_store(args))
    return _out(args, "free-energy", text=canonical_text(fe.poly),
                result={"poly": emit.poly_json(fe.poly), "diagnostics": {"provenance": fe.provenance, **fe.fit}},
                latex=[emit.equation_lines(f"F_{{{args.genus}}}", emit.term_strings(fe.poly))],
                title=f"Free energy, genus {args.genus}")


def cmd_hodge_potential(args) -> int:
    rec = _recursion(args)
    tab = hodge_potential(args.genus, rec.ring, verify_extra_stage=args.check_extra_stage, recursion=rec)
    h = args.genus if args.stage is None else args.stage
    if not 0 <= h <= args.genus:
        raise UsageError(f"stage must lie in 0..{args.genus}")
    poly = tab.stages[h]
    bad = check_table(tab)
    name = f"H_{{{args.genus}}}" if h == args.genus else f"H_{{{args.genus},{h}}}"
    return _out(args, "hodge-potential", text=canonical_text(poly) if not bad else canonical_text(poly) + "\n" + "\n".join(bad),
                result={"poly": emit.poly_json(poly), "diagnostics": {"provenance": tab.provenance, "violations": bad,
                                                                       "stage_bounds": {str(k): v for k, v in tab.N.items()}}},
                latex=[emit.equation_lines(name, emit.term_strings(poly))],
                title=f"Hodge potential, genus {args.genus}", ok=not bad)


def _extractor(args):
    from .lambda_extract import Extractor

    return Extractor(_recursion(args))


def _lambda_key(idx) -> str:
    return ",".join(map(str, idx)) if idx else "1"


def cmd_hodge_gf(args) -> int:
    from .lambda_extract import distinct_monomials, weight_bound

    ex = _extractor(args)
    g = args.genus
    if g < 2:
        raise UsageError("generating functions are tabulated for genus >= 2")
    store = _store(args)
    prov = ex.rec.provenance(g)

    def gf(idx):
        key = {"genus": g, "lambda": list(idx), "prov": prov}
        if store is not None:
            hit = store.get_poly("gf", key, ex.rec.ring)
            if hit is not None:
                return hit
        p = ex.gf_combination(g, idx)
        if store is not None:
            store.put_poly("gf", key, p)
        return p

    if args.all:
        idxs = [M for M in distinct_monomials(g) if M and sum(M) <= weight_bound(g)]
    else:
        if args.lambda_ is None:
            raise UsageError("give --lambda i,j,... or --all")
        idxs = [tuple(i for i in args.lambda_ if i)]
    polys = {_lambda_key(M): gf(M) for M in idxs}
    text = "\n".join(f"[{k}] {canonical_text(p)}" for k, p in polys.items())
    latex = [emit.equation_lines(f"G_{{{g}}}[\\lambda_{{{k}}}]" if k != "1" else f"G_{{{g}}}[1]", emit.term_strings(p))
             for k, p in polys.items()]
    return _out(args, "hodge-gf", text=text, result={"polys": {k: emit.poly_json(p) for k, p in polys.items()}},
                latex=latex, title=f"Hodge generating functions, genus {g}")


def cmd_hodge_number(args) -> int:
    ex = _extractor(args)
    idx = tuple(i for i in (args.lambda_ or ()) if i)
    val = ex.hodge_number(args.genus, idx, args.psi or ())
    t = emit.rat_text(val)
    lam = " ".join(f"\\lambda_{{{i}}}" for i in idx)
    psi = " ".join(f"\\psi_{{{j + 1}}}^{{{p}}}" for j, p in enumerate(args.psi or ()))
    n = len(args.psi or ())
    sign, mag = emit._coeff_latex(val)
    rhs = ("-" if sign == "-" else "") + (mag or "1") if val else "0"
    return _out(args, "hodge-number", text=t, result={"value": t},
                latex=[[f"\\int_{{\\overline{{\\mathcal M}}_{{{args.genus},{n}}}}} {lam} {psi} &= {rhs}"]],
                title="Hodge integral")


def _hierarchy(args) -> Hierarchy:
    rec = _recursion(args)
    gmax = max(args.order // 2, 1)
    return Hierarchy({g: rec.potential(g) for g in range(1, gmax + 1)}, max(args.order, 2)), rec


def cmd_hierarchy(args) -> int:
    hier, rec = _hierarchy(args)
    store = _store(args)
    prov = rec.provenance(max(args.order // 2, 1))
    ring = hier.ring
    if args.miura:
        what, lhs, var = "quasi-Miura", "w", "v"
        e = _cached_eps(store, "miura", {"order": args.order, "prov": prov}, ring, lambda: hier.forward.truncate(args.order))
    elif args.inverse:
        what, lhs, var = "inverse quasi-Miura", "v", "w"
        e = _cached_eps(store, "miura-inverse", {"order": args.order, "prov": prov}, ring,
                        lambda: hier.inverse().truncate(args.order))
    elif args.density is not None:
        q = args.density
        what, lhs, var = f"density h_{q}", f"h_{{{q}}}", "w"
        e = _cached_eps(store, "density", {"order": args.order, "q": q, "prov": prov}, ring,
                        lambda: hier.density(q).truncate(args.order))
    else:
        q = args.flow
        what, lhs, var = f"flow t_{q}", f"\\frac{{\\partial w}}{{\\partial t_{{{q}}}}}", "w"
        e = _cached_eps(store, "flow", {"order": args.order, "q": q, "prov": prov}, ring,
                        lambda: hier.flow(q).truncate(args.order))
    return _out(args, "hierarchy", text=_eps_text(e), result={"expansion": emit.eps_json(e)},
                latex=[emit.equation_lines(lhs, emit.eps_terms(e, var))], title=f"Hodge hierarchy: {what}")


def cmd_ham_operator(args) -> int:
    hier, rec = _hierarchy(args)
    store = _store(args)
    prov = rec.provenance(max(args.order // 2, 1))
    key = {"order": args.order, "prov": prov}
    P = None
    if store is not None:
        text = store.get_text("operator", key)
        if text is not None:
            from .hierarchy import DiffOperator

            coeffs: dict = {}
            for line in text.splitlines():
                head, body = line.split(":", 1)
                k, n = (int(x) for x in head.split())
                coeffs.setdefault(k, {})[n] = parse(body.strip(), hier.ring)
            P = DiffOperator({k: EpsExpansion(hier.ring, c, args.order) for k, c in coeffs.items()})
    if P is None:
        P = hier.operator()
        P = type(P)({k: c.truncate(args.order) for k, c in P.coeffs.items()})
        if store is not None:
            store.put_text("operator", key, "\n".join(
                f"{k} {n}: {canonical_text(c[n])}" for k, c in sorted(P.coeffs.items()) for n in range(c.order + 1) if c[n].terms))
    return _out(args, "ham-operator", text=_operator_text(P), result={"operator": emit.operator_json(P, args.order)},
                latex=[emit.equation_lines("\\tilde P", emit.operator_terms(P))], title="Hamiltonian operator")


def _report_out(args, command: str, reps: list, title: str, extra_result: dict | None = None) -> int:
    ok = all(r.ok for r in reps)
    lines = []
    notes = []
    for r in reps:
        for i in r.items:
            lines.append(f"{'PASS' if i.ok else 'FAIL'} {r.name}: {i.label}" + ("" if i.ok else f"\n  got:  {i.got}\n  want: {i.want}"))
        for n in r.notes:
            lines.append(f"NOTE {r.name}: {n}")
            notes.append(f"{r.name}: {n}")
    rows = [[f"\\text{{{emit._escape(i.label)}}} &: \\text{{{'pass' if i.ok else 'FAIL'}}}" for i in r.items] for r in reps]
    result = {"reports": [emit.report_json(r) for r in reps]}
    result.update(extra_result or {})
    code = _out(args, command, text="\n".join(lines), result=result, latex=rows, title=title, ok=ok, notes=notes)
    if getattr(args, "check", True):
        return code
    return EXIT_OK


def cmd_specialize(args) -> int:
    from . import specializations as sp

    rec = _recursion(args)
    if args.name == "ilw":
        reps = [sp.ilw_check(args.order or 4, rec)]
    elif args.name == "volterra":
        reps = [sp.volterra_check(args.order or 4, rec)]
    else:
        order = args.order or 6
        reps = [sp.cubic_check(order, args.samples or sp.DEFAULT_CUBIC_SAMPLES, rec)]
    return _report_out(args, "specialize", reps, f"Specialization: {args.name}")


def cmd_normal_form(args) -> int:
    from . import specializations as sp

    rec = _recursion(args)
    order = args.order
    if order not in (2, 4, 6, 8):
        raise UsageError("normal-form supports --order 2, 4, 6 or 8")
    rep = sp.normal_form_check(order, rec)
    hier = Hierarchy({g: rec.potential(g) for g in range(1, order // 2 + 1)}, order)
    nf = sp.normal_form_h1(order, density=hier.density(1), operator=hier.operator())
    std = {}
    lines = []
    for n, gam in nf.standard.items():
        for mono, c in gam:
            key = f"eps^{2 * n} {canonical_text(mono)[4:]}"
            std[key] = emit.poly_json(c)
            lines.append(f"{key}: {canonical_text(c)}")
    code_text = "\n".join(lines)
    terms = []
    for n, gam in nf.standard.items():
        for mono, c in gam:
            terms.append(f"+ \\epsilon^{{{2 * n}}}\\left({emit.poly_latex(c)}\\right) {emit.poly_latex(mono, 'w')}")
    latex_blocks = [emit.equation_lines("\\hat h_1", ["+ \\frac{1}{6} w^{3}"] + terms),
                    emit.equation_lines("\\tilde w", emit.eps_terms(nf.transformation, "w"))]
    if args.format == "text":
        print(code_text)
        args_for_report = argparse.Namespace(**{**vars(args), "format": "text"})
        return _report_out(args_for_report, "normal-form", [rep], "Normal form")
    if args.format == "latex":
        return _out(args, "normal-form", text="", result={}, latex=latex_blocks, title="Normal form of h_1",
                    ok=rep.ok, notes=rep.notes)
    return _report_out(args, "normal-form", [rep], "Normal form",
                       extra_result={"polys": std, "expansion": emit.eps_json(nf.transformation)})


def cmd_verify(args) -> int:
    from . import verify

    checks = verify.run_core(args.seed)
    reps = []
    if args.suite == "full":
        from . import specializations as sp
        from .lambda_extract import Extractor

        rec = HodgeRecursion(default_ring())
        reps = [sp.ilw_check(4, rec), sp.volterra_check(4, rec), sp.cubic_check(6, recursion=rec),
                sp.normal_form_check(8, rec)]
        ex = Extractor(rec)
        for idx, want in (((3, 4, 5), mpq(1, 2554675200)), ((1, 2, 4, 5), mpq(1, 766402560))):
            got = ex.hodge_number(5, idx)
            checks.append(verify.Check("lambda", f"genus 5 lambda {idx} at t=0", got == want, f"{got} vs {want}"))
    failed = [c for c in checks if not c.ok] + [i for r in reps for i in r.items if not i.ok]
    lines = [f"{'PASS' if c.ok else 'FAIL'} {c.suite}: {c.name}" + ("" if c.ok or not c.detail else f" ({c.detail})")
             for c in checks]
    for r in reps:
        lines += [f"{'PASS' if i.ok else 'FAIL'} {r.name}: {i.label}" for i in r.items]
    lines.append(f"{len(checks) + sum(len(r.items) for r in reps) - len(failed)} passed, {len(failed)} failed")
    result = {"reports": [emit.report_json(r) for r in reps],
              "diagnostics": {"checks": [{"suite": c.suite, "name": c.name, "ok": c.ok, "detail": c.detail} for c in checks]}}
    rows = [[f"\\text{{{emit._escape(c.suite + ': ' + c.name)}}} &: \\text{{{'pass' if c.ok else 'FAIL'}}}"]
            for c in checks if not c.ok] or [["\\text{all checks} &: \\text{pass}"]]
    return _out(args, "verify", text="\n".join(lines), result=result, latex=rows, title=f"verify {args.suite}",
                ok=not failed)


# ---------------------------------------------------------------------------
# parser
# ---------------------------------------------------------------------------

def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--format", choices=("text", "json", "latex"), default="text")
    common.add_argument("--cache-dir", default=None,
                        help=f"cache directory (default ${ENV_VAR} or {default_cache_dir()})")
    common.add_argument("--no-cache", action="store_true", help="neither read nor write the disk cache")

    p = argparse.ArgumentParser(prog="hodge", description="Hodge potentials of a point and the Hodge hierarchy.")
    sub = p.add_subparsers(dest="command", required=True)

    s = sub.add_parser("bernoulli", parents=[common], help="Bernoulli number B_n (B_1 = -1/2)")
    s.add_argument("n", type=int)
    s.set_defaults(func=cmd_bernoulli)

    s = sub.add_parser("free-energy", parents=[common], help="free energy F_g in jet variables")
    s.add_argument("--genus", type=int, required=True)
    s.add_argument("--refit", action="store_true", help="refit even where a closed form exists")
    s.set_defaults(func=cmd_free_energy)

    s = sub.add_parser("hodge-potential", parents=[common], help="Hodge potential H_g")
    s.add_argument("--genus", type=int, required=True)
    s.add_argument("--stage", type=int, default=None, help="stage h (default g)")
    s.add_argument("--check-extra-stage", action="store_true")
    s.set_defaults(func=cmd_hodge_potential)

    s = sub.add_parser("hodge-gf", parents=[common], help="generating function of a lambda monomial")
    s.add_argument("--genus", type=int, required=True)
    s.add_argument("--lambda", dest="lambda_", type=_int_list, default=None, help="indices, e.g. 1,2")
    s.add_argument("--all", action="store_true", help="every distinct-index monomial")
    s.set_defaults(func=cmd_hodge_gf)

    s = sub.add_parser("hodge-number", parents=[common], help="Hodge integral of lambda and psi classes")
    s.add_argument("--genus", type=int, required=True)
    s.add_argument("--lambda", dest="lambda_", type=_int_list, default=None)
    s.add_argument("--psi", type=_int_list, default=None, help="psi exponents, e.g. 3 or 1,2")
    s.set_defaults(func=cmd_hodge_number)

    s = sub.add_parser("hierarchy", parents=[common], help="flows, densities and the quasi-Miura map")
    s.add_argument("--order", type=_even_order, default=4)
    g = s.add_mutually_exclusive_group()
    g.add_argument("--flow", type=int, default=1)
    g.add_argument("--density", type=int, default=None)
    g.add_argument("--miura", action="store_true")
    g.add_argument("--inverse", action="store_true")
    s.set_defaults(func=cmd_hierarchy)

    s = sub.add_parser("ham-operator", parents=[common], help="Hamiltonian operator in w")
    s.add_argument("--order", type=_even_order, default=4)
    s.set_defaults(func=cmd_ham_operator)

    s = sub.add_parser("specialize", parents=[common], help="ILW, Volterra or cubic specialization checks")
    s.add_argument("name", choices=("ilw", "volterra", "cubic"))
    s.add_argument("--order", type=_even_order, default=None)
    s.add_argument("--samples", type=_samples, default=None, help="cubic samples p,q;p,q;...")
    s.add_argument("--check", action="store_true", help="exit 1 if any comparison fails")
    s.set_defaults(func=cmd_specialize)

    s = sub.add_parser("normal-form", parents=[common], help="standard form of h_1")
    s.add_argument("--order", type=_even_order, default=6)
    s.set_defaults(func=cmd_normal_form)

    s = sub.add_parser("verify", parents=[common], help="run property suites")
    s.add_argument("--suite", choices=("core", "full"), default="core")
    s.add_argument("--seed", type=int, default=0)
    s.set_defaults(func=cmd_verify)
    return p


def run(argv: Sequence[str] | None = None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as e:
        return int(e.code or 0)
    if args.cache_dir is None:
        args.cache_dir = os.environ.get(ENV_VAR) or str(default_cache_dir())
    try:
        return args.func(args)
    except (UsageError, ValueError) as err:
        print(f"hodge {args.command}: error: {err}", file=sys.stderr)
        return EXIT_USAGE


def main(argv: Sequence[str] | None = None) -> None:
    sys.exit(run(argv))


if __name__ == "__main__":
    main()
