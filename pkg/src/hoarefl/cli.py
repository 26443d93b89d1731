"""``hoarefl`` command line: exit 0 accepted/true, 1 rejected/unproven/false, 2 usage or parse error."""
from __future__ import annotations

import argparse
import json
import sys

from . import formats
from .text import ParseError, parse_sequent, print_formula, print_pca, show

OK, NO, USAGE = 0, 1, 2


class _Usage(Exception):
    pass


def _theory(args):
    return formats.load_theory(args.theory) if getattr(args, "theory", None) else None


def _report(args, ok: bool, verdict: str, **extra) -> int:
    if args.json:
        print(json.dumps({"command": args.command, "ok": ok, "verdict": verdict, **extra}, sort_keys=True))
    else:
        print(verdict)
    return OK if ok else NO


def cmd_check_hoare(args):
    from .hoare import check_hoare
    d = formats.load_hoare(args.file)
    v = check_hoare(d, _theory(args), args.depth)
    return _report(args, v.ok, str(v), conclusion=print_pca(d.conclusion))


def cmd_check_flp(args):
    from .sequent import CLASSICAL, FL, FLPLUS, INTUITIONISTIC, RuleSet, check_derivation
    d = formats.load_deriv(args.file)
    rules = RuleSet(FL if args.logic == "fl" else FLPLUS,
                    INTUITIONISTIC if args.intuitionistic else CLASSICAL, args.allow_cut)
    v = check_derivation(d, rules, _theory(args))
    return _report(args, v.ok, str(v), end_sequent=show(d.conclusion))


def cmd_translate(args):
    from .translate import translate_pca, translate_program
    pca = formats.load_pca(args.file)
    f = translate_program(pca.prog).formula if args.emit == "m" else translate_pca(pca)
    text = print_formula(f)
    if args.json:
        return _report(args, True, "translated", formula=text)
    print(text)
    return OK


def cmd_compile(args):
    from .compile import CompileError, compile_hoare_to_flp
    d = formats.load_hoare(args.file)
    try:
        out = compile_hoare_to_flp(d, _theory(args), args.depth)
    except CompileError as e:
        print(f"compile failed: {e}", file=sys.stderr)
        return _report(args, False, "unproven", reason=str(e))
    return _emit(args, formats.deriv_to_json(out), "compiled")


def cmd_extract(args):
    from .extract import ExtractionError, extract_hoare
    d = formats.load_deriv(args.file)
    pca = formats.load_pca(args.pca)
    try:
        h = extract_hoare(d, pca, _theory(args), args.depth)
    except ExtractionError as e:
        print(f"extraction failed: {e}", file=sys.stderr)
        return _report(args, False, "rejected", reason=str(e))
    return _emit(args, formats.hoare_to_json(h), "extracted")


def _emit(args, doc, verdict):
    if args.output:
        formats.dump_json(doc, args.output)
        return _report(args, True, verdict, output=args.output)
    if args.json:
        return _report(args, True, verdict, derivation=doc)
    print(json.dumps(doc, indent=1))
    return OK


def cmd_roundtrip(args):
    from .compile import CompileError, compile_hoare_to_flp
    from .extract import ExtractionError, extract_hoare
    from .hoare import check_hoare
    theory = _theory(args)
    d = formats.load_hoare(args.file)
    try:
        flp = compile_hoare_to_flp(d, theory, args.depth)
        h = extract_hoare(flp, d.conclusion, theory, args.depth)
    except (CompileError, ExtractionError) as e:
        print(f"round trip failed: {e}", file=sys.stderr)
        return _report(args, False, "failed", reason=str(e))
    v = check_hoare(h, theory, args.depth)
    same = h.conclusion == d.conclusion
    diff = "" if same else f"{print_pca(d.conclusion)}  !=  {print_pca(h.conclusion)}"
    verdict = "round trip ok" if v.ok and same else f"round trip differs: {v if not v.ok else diff}"
    return _report(args, v.ok and same, verdict, size=h.size(), conclusion=print_pca(h.conclusion))


def cmd_eval(args):
    from .model import pca_valid_in, satisfies_theory, valuations, eval_formula
    from .syntax import free_vars
    from .text import parse_formula
    S = formats.load_structure(args.structure)
    theory = _theory(args)
    if theory is not None and not satisfies_theory(S, theory.axioms):
        print("structure violates the theory", file=sys.stderr)
    if args.pca:
        ok = pca_valid_in(S, formats.load_pca(args.pca))
    elif args.formula:
        f = parse_formula(args.formula)
        ok = all(eval_formula(S, env, {}, f) for env in valuations(S, sorted(free_vars(f))))
    else:
        raise _Usage("eval needs --pca or --formula")
    return _report(args, ok, "true" if ok else "false")


def cmd_prove(args):
    from .prover import prove_fo
    from .sequent import CLASSICAL, INTUITIONISTIC
    s = parse_sequent(args.sequent)
    d = prove_fo(s, args.depth, _theory(args), INTUITIONISTIC if args.intuitionistic else CLASSICAL)
    if d is None:
        return _report(args, False, f"unproven({args.depth})")
    doc = formats.deriv_to_json(d)
    if args.output:
        formats.dump_json(doc, args.output)
    return _report(args, True, "proved", derivation=doc if args.json else None)


def _parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="hoarefl", description="Hoare logic and second-order sequent proofs.")
    p.add_argument("--json", action="store_true", help="machine-readable verdicts")
    sub = p.add_subparsers(dest="command", required=True)

    def add(name, fn, *, theory=True, depth=True, helptext=""):
        q = sub.add_parser(name, help=helptext)
        q.add_argument("--json", action="store_true", default=argparse.SUPPRESS)
        if theory:
            q.add_argument("--theory", metavar="T.fol")
        if depth:
            q.add_argument("--depth", type=int, default=6, metavar="N")
        q.set_defaults(fn=fn)
        return q

    q = add("check-hoare", cmd_check_hoare, helptext="check a Hoare derivation")
    q.add_argument("file")
    q = add("check-flp", cmd_check_flp, depth=False, helptext="check a sequent derivation")
    q.add_argument("file")
    q.add_argument("--logic", choices=("fl", "flp"), default="flp")
    q.add_argument("--intuitionistic", action="store_true")
    q.add_argument("--allow-cut", action="store_true")
    q = add("translate", cmd_translate, theory=False, depth=False, helptext="print M or the pca formula")
    q.add_argument("file")
    q.add_argument("--emit", choices=("m", "hat"), default="hat")
    q = add("compile", cmd_compile, helptext="Hoare derivation to sequent derivation")
    q.add_argument("file")
    q.add_argument("-o", "--output")
    q = add("extract", cmd_extract, helptext="sequent derivation to Hoare derivation")
    q.add_argument("file")
    q.add_argument("--pca", required=True)
    q.add_argument("-o", "--output")
    q = add("roundtrip", cmd_roundtrip, helptext="compile, extract, check and compare")
    q.add_argument("file")
    q = add("eval", cmd_eval, depth=False, helptext="evaluate in a finite structure")
    q.add_argument("--structure", required=True)
    q.add_argument("--pca")
    q.add_argument("--formula")
    q = add("prove", cmd_prove, helptext="search for a first-order derivation")
    q.add_argument("sequent")
    q.add_argument("--intuitionistic", action="store_true")
    q.add_argument("-o", "--output")
    return p


def main(argv=None) -> int:
    parser = _parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as e:
        return USAGE if e.code else OK
    try:
        return args.fn(args)
    except (ParseError, _Usage, OSError, json.JSONDecodeError, KeyError) as e:
        print(f"error: {e}", file=sys.stderr)
        return USAGE
    except ValueError as e:
        print(f"error: {e}", file=sys.stderr)
        return NO


if __name__ == "__main__":
    sys.exit(main())
