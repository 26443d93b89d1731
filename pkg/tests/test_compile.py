import pytest

from hoarefl import hoare as H
from hoarefl.compile import CompileError, compile_hoare_to_flp
from hoarefl.sequent import (
    FL, FLPLUS, INTUITIONISTIC, RuleSet, check_derivation, check_negativity, uses_forall2,
)
from hoarefl.syntax import TRUE
from hoarefl.text import parse_formula as F, parse_program as P, print_formula, print_sequent
from hoarefl.translate import translate_pca


def test_assignment_is_first_order():
    d = compile_hoare_to_flp(H.assignment(P("x := f(x)"), F("x = c")))
    assert print_sequent(d.conclusion) == "|- (forall x, v1. f(x) = c & v1 = f(x) -> v1 = c)"
    assert not uses_forall2(d)
    assert check_derivation(d, RuleSet(FL))


def test_iteration_instantiates_the_invariant():
    d = compile_hoare_to_flp(H.iterate(H.assignment(P("x := f(x)"), TRUE)))
    nodes = [n for n in d.nodes() if n.rule == "all2-l"]
    assert len(nodes) == 1
    assert nodes[0].pred.arity == 1
    assert print_formula(nodes[0].pred.body) == "true"
    assert check_derivation(d, RuleSet(FLPLUS))


def test_corpus_compiles_to_negative_intuitionistic_proofs(corpus, compiled):
    for name, (d, theory) in corpus.items():
        out = compiled[name]
        assert check_derivation(out, RuleSet(FLPLUS), theory), name
        assert check_derivation(out, RuleSet(FLPLUS, INTUITIONISTIC), theory), name
        assert check_negativity(out), name
        assert print_formula(out.conclusion.succ[0]) == print_formula(translate_pca(d.conclusion))
        assert not out.conclusion.ante


def test_glue_without_the_theory_fails(corpus):
    d, _ = corpus["monoid_loop"]
    with pytest.raises(CompileError, match="unproven"):
        compile_hoare_to_flp(d, None, 4)


def test_rejected_derivations_are_not_compiled():
    bad = H.HoareDerivation("Assignment", H.Pca(F("x = c"), P("x := f(x)"), F("x = c")))
    with pytest.raises(CompileError):
        compile_hoare_to_flp(bad)
