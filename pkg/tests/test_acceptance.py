"""Acceptance criteria 1-9, one verdict line each in the terminal summary.

Every tolerance is exact: a single disagreement fails the criterion.  The
time budgets are part of the verdict; an over-budget run reports FAIL.
"""
import random

import pytest

from hoarefl.compile import compile_hoare_to_flp
from hoarefl.extract import (colorings, expand_derivation, extract_hoare, interpolate,
                             unexpand, vocabulary_ok)
from hoarefl.formats import load_structure
from hoarefl.hoare import check_hoare
from hoarefl.model import (all_structures, batches, eval_formula, formula_table, pca_valid_in,
                           program_table, random_structure, run_program, satisfies_theory,
                           vocabulary_of)
from hoarefl.prover import prove_fo
from hoarefl.sequent import (CLASSICAL, FL, FLPLUS, INTUITIONISTIC, RuleSet, check_derivation,
                             check_negativity, collect_eigen_predicates, is_cut_free, uses_forall2)
from hoarefl.syntax import NONE, POSITIVE_ONLY, Pca, Sequent, alpha_key, forall2_polarity, is_negative_sequent
from hoarefl.text import parse_formula, print_formula
from hoarefl.translate import expand_sequent, translate_pca, translate_program
from acceptance_report import criterion
from conftest import CORPUS
from enumeration import PROGRAM_VOCAB, derivation_corpus, programs

SEED = 20240501
RANDOM_STRUCTURES = 100
MAX_SIZE = 3
ROUND_TRIP_DEPTH = 8
REPROVE_DEPTH = 6


def _finish(box):
    assert box["passed"], box["detail"]


@pytest.fixture(scope="module")
def small_programs():
    return programs(6)


def test_criterion_1_program_semantics(small_programs):
    with criterion(1, "M_alpha agrees with run_program", 60) as box:
        bs = batches(all_structures(PROGRAM_VOCAB, MAX_SIZE))
        bad = cells = 0
        for p in small_programs:
            tr = translate_program(p, ("x",))
            names = ("x", tr.outputs[0])
            for b in bs:
                F, R = formula_table(b, tr.formula, names), program_table(b, p, ("x",))
                cells += F.size
                bad += int((F != R).sum())
        # the batched tables are themselves checked against the scalar oracles
        rng, scalar_bad, scalar = random.Random(SEED), 0, 0
        for p in rng.sample(small_programs, 40):
            tr = translate_program(p, ("x",))
            for b in bs:
                F = formula_table(b, tr.formula, ("x", tr.outputs[0]))
                for i in rng.sample(range(b.count), min(2, b.count)):
                    S = b.structures[i]
                    for a in range(S.size):
                        reach = {e["x"] for e in run_program(S, {"x": a}, p)}
                        for c in range(S.size):
                            scalar += 1
                            want = c in reach
                            got = eval_formula(S, {"x": a, tr.outputs[0]: c}, {}, tr.formula)
                            scalar_bad += (want != got) + (want != bool(F[i, a, c]))
        nstruct = sum(b.count for b in bs)
        box["ok"] = bad == 0 and scalar_bad == 0
        box["detail"] = (f"{len(small_programs)} programs x {nstruct} structures, "
                         f"{cells} (in, out) pairs, {bad} disagreements; "
                         f"scalar cross-check {scalar} pairs, {scalar_bad} disagreements")
    _finish(box)


def test_criterion_2_soundness(corpus):
    with criterion(2, "accepted Hoare derivations are valid", 30) as box:
        rng = random.Random(SEED)
        parts, bad = [], 0
        for name, (d, th) in corpus.items():
            if not check_hoare(d, th):
                parts.append(f"{name}: not accepted")
                continue
            pca = d.conclusion
            vocab = vocabulary_of(pca, *(th.axioms if th else ()))
            models = trivial = invalid = 0
            for _ in range(RANDOM_STRUCTURES):
                S = random_structure(vocab, rng.randint(1, MAX_SIZE), rng)
                if th is not None and not satisfies_theory(S, th.axioms):
                    continue
                models += 1
                trivial += S.size == 1
                invalid += not pca_valid_in(S, pca)
            extra = ""
            if th is not None:
                # random draws rarely satisfy a theory; add every small model
                small = [S for S in all_structures(vocab, 2) if satisfies_theory(S, th.axioms)]
                small.append(load_structure(CORPUS / "z3_monoid.json"))
                invalid += sum(not pca_valid_in(S, pca) for S in small)
                extra = f" ({trivial} of size 1) + {len(small)} enumerated"
            bad += invalid
            parts.append(f"{name} {models}/{RANDOM_STRUCTURES}{extra} models, {invalid} invalid")
        box["ok"] = bad == 0 and all("not accepted" not in s for s in parts)
        box["detail"] = "; ".join(parts)
    _finish(box)


def test_criterion_3_compile(corpus):
    with criterion(3, "compiled derivations check", 10) as box:
        fails = []
        for name, (d, th) in corpus.items():
            D = compile_hoare_to_flp(d, th)
            checks = {
                "flplus": check_derivation(D, RuleSet(FLPLUS, CLASSICAL), th).ok,
                "intuitionistic": check_derivation(D, RuleSet(FLPLUS, INTUITIONISTIC), th).ok,
                "negativity": check_negativity(D).ok,
                "cut-free": is_cut_free(D),
                "end-sequent": D.conclusion.ante == () and len(D.conclusion.succ) == 1
                and print_formula(D.conclusion.succ[0]) == print_formula(translate_pca(d.conclusion)),
            }
            fails += [f"{name}:{k}" for k, v in checks.items() if not v]
        box["ok"] = not fails
        box["detail"] = f"{len(corpus)} derivations, failures: {fails or 'none'}"
    _finish(box)


def test_criterion_4_polarity(small_programs):
    with criterion(4, "M_alpha positive, pca formula negative", 10) as box:
        q = parse_formula("Q(x)")
        bad_m = bad_hat = 0
        for p in small_programs:
            bad_m += forall2_polarity(translate_program(p).formula) not in (POSITIVE_ONLY, NONE)
            bad_hat += not is_negative_sequent(Sequent((), (translate_pca(Pca(q, p, q)),)))
        box["ok"] = bad_m == bad_hat == 0
        box["detail"] = (f"{len(small_programs)} programs, {bad_m} non-positive M_alpha, "
                         f"{bad_hat} non-negative pca sequents")
    _finish(box)


def test_criterion_5_expansion(corpus, compiled):
    with criterion(5, "expansion yields first-order proofs", 10) as box:
        fails = []
        for name, D in compiled.items():
            th = corpus[name][1]
            xi = collect_eigen_predicates(D)
            E = expand_derivation(D, xi)
            want = {alpha_key(f) for f in expand_sequent(D.conclusion, xi).succ}
            ok = (check_derivation(E, RuleSet(FL, CLASSICAL), th).ok and is_cut_free(E)
                  and not uses_forall2(E) and {alpha_key(f) for f in E.conclusion.succ} == want
                  and E.conclusion.ante == ())
            if not ok:
                fails.append(name)
        box["ok"] = not fails
        box["detail"] = f"{len(compiled)} derivations, failures: {fails or 'none'}"
    _finish(box)


def test_criterion_6_unexpansion(corpus, compiled):
    with criterion(6, "unexpansion re-derives the end-sequent", 10) as box:
        fails = []
        for name, D in compiled.items():
            th = corpus[name][1]
            xi = collect_eigen_predicates(D)
            U = unexpand(expand_derivation(D, xi), D.conclusion, xi)
            if not (U.conclusion == D.conclusion
                    and check_derivation(U, RuleSet(FLPLUS, CLASSICAL, True), th).ok):
                fails.append(name)
        box["ok"] = not fails
        box["detail"] = f"{len(compiled)} derivations, failures: {fails or 'none'}"
    _finish(box)


def test_criterion_7_interpolation():
    with criterion(7, "interpolation contract", 300) as box:
        ds = derivation_corpus(1000)
        total = bad = 0
        for d in ds:
            for p in colorings(d.conclusion):
                total += 1
                I = interpolate(d, p)
                ok = vocabulary_ok(I.formula, p)
                halves = ((I.left, p.left.ante, p.left.succ + (I.formula,)),
                          (I.right, (I.formula,) + p.right.ante, p.right.succ))
                for w, ante, succ in halves:
                    c = w.conclusion
                    ok = ok and check_derivation(w, RuleSet(FL)).ok and is_cut_free(w)
                    ok = ok and set(c.ante) <= set(ante) and set(c.succ) <= set(succ)
                    ok = ok and prove_fo(Sequent(tuple(ante), tuple(succ)), REPROVE_DEPTH) is not None
                bad += not ok
        widest = max(len(d.conclusion.ante) + len(d.conclusion.succ) for d in ds)
        box["ok"] = len(ds) >= 1000 and bad == 0 and widest <= 6
        box["detail"] = (f"{len(ds)} derivations (at most {widest} formulas), "
                         f"{total} colorings, {bad} violations")
    _finish(box)


def _round_trip(d, th, D):
    h = extract_hoare(D, d.conclusion, th, ROUND_TRIP_DEPTH)
    return check_hoare(h, th, ROUND_TRIP_DEPTH).ok and h.conclusion == d.conclusion


def test_criterion_8_round_trip(corpus, compiled):
    with criterion(8, "compile then extract round trip", 120) as box:
        names = [n for n, (_, th) in corpus.items() if th is None]
        fails = [n for n in names if not _round_trip(*corpus[n], compiled[n])]
        box["ok"] = not fails
        box["detail"] = f"{len(names)} derivations at depth {ROUND_TRIP_DEPTH}, failures: {fails or 'none'}"
    _finish(box)


def test_criterion_9_theory_round_trip(corpus, compiled):
    with criterion(9, "round trip relative to the monoid theory", 120) as box:
        d, th = corpus["monoid_loop"]
        ok = th is not None and _round_trip(d, th, compiled["monoid_loop"])
        box["ok"] = ok
        box["detail"] = f"monoid_loop with {len(th.axioms)} axioms: {'accepted' if ok else 'failed'}"
    _finish(box)
