import random


from hoarefl import hoare as H
from hoarefl.formats import hoare_from_json, hoare_to_json
from hoarefl.model import pca_valid_in, random_structure, satisfies_theory, vocabulary_of
from hoarefl.prover import prove_fo
from hoarefl.syntax import FALSE, TRUE, Sequent
from hoarefl.text import parse_formula as F, parse_program as P, print_pca


def test_assignment_axiom():
    d = H.assignment(P("x := f(x)"), F("x = c"))
    assert print_pca(d.conclusion) == "{f(x) = c} x := f(x) {x = c}"
    assert H.check_hoare(d)


def test_assignment_with_wrong_precondition_is_rejected():
    d = H.HoareDerivation("Assignment", H.Pca(F("x = c"), P("x := f(x)"), F("x = c")))
    v = H.check_hoare(d)
    assert not v and "substituted" in v.reason


def test_midcondition_mismatch():
    left = H.assignment(P("x := c"), F("x = c"))
    right = H.assignment(P("y := x"), F("y = x"))
    bad = H.HoareDerivation(
        "Composition", H.Pca(left.conclusion.pre, P("x := c ; y := x"), right.conclusion.post), (left, right))
    v = H.check_hoare(bad)
    assert not v and "midcondition" in v.reason


def test_rejection_reports_the_failing_path():
    good = H.assignment(P("x := c"), F("x = c"))
    bad = H.HoareDerivation("Assignment", H.Pca(F("x = c"), P("x := c"), F("x = d")))
    v = H.check_hoare(H.compose(good, bad))
    assert not v and v.path == (1,)
    assert str(v).startswith("rejected at 1:")


def test_loop1_corpus_entry(corpus):
    d, _ = corpus["loop1"]
    assert print_pca(d.conclusion) == "{true} (?~x = c ; x := f(x))* ; ?x = c {x = c}"
    assert H.check_hoare(d)


def test_while_construction_matches_corpus(corpus):
    body = H.assignment(P("x := f(x)"), TRUE)
    d = H.derive_while(TRUE, F("~x = c"), body)
    assert H.check_hoare(d)
    assert d.count("Iteration") == 1
    assert print_pca(d.conclusion) == "{true} (?~x = c ; x := f(x))* ; ?x = c {true & x = c}"


def test_false_invariant_is_vacuous():
    d = H.derive_while(FALSE, F("~x = c"), H.assignment(P("x := f(x)"), FALSE))
    assert H.check_hoare(d)
    assert d.conclusion.pre == FALSE


def test_body_breaking_the_invariant_is_rejected():
    d = H.derive_while(F("x = c"), F("~x = d"), H.assignment(P("x := f(x)"), F("x = c")))
    assert not H.check_hoare(d)


def test_side_witness_derivation_is_checked():
    pca = H.Pca(F("P(c)"), P("?Q(c)"), F("P(c)"))
    goal = H.test_goal(pca)
    w = prove_fo(Sequent((), (goal,)), 4)
    assert H.check_hoare(H.test(pca.pre, pca.prog.cond, pca.post, w))
    wrong = prove_fo(Sequent((), (F("P(c) -> P(c)"),)), 4)
    assert not H.check_hoare(H.test(pca.pre, pca.prog.cond, pca.post, wrong))


def test_side_conditions_fail_at_small_depth():
    d = H.consequence(F("forall x. P(x)"), H.assignment(P("x := c"), F("P(x)")), F("P(x)"))
    assert H.check_hoare(d, depth=4)
    assert not H.check_hoare(d, depth=0)


def test_consequence_needs_the_theory(corpus, monoid):
    d, _ = corpus["monoid_loop"]
    assert H.check_hoare(d, monoid)
    assert not H.check_hoare(d)


def test_json_round_trip(corpus):
    for d, theory in corpus.values():
        back = hoare_from_json(hoare_to_json(d))
        assert back.conclusion == d.conclusion and back.size() == d.size()
        assert H.check_hoare(back, theory)


def test_unknown_rule():
    d = H.HoareDerivation("Frame", H.Pca(TRUE, P("x := c"), TRUE))
    assert not H.check_hoare(d)


def test_accepted_corpus_is_sound_on_samples(corpus):
    rng = random.Random(3)
    for name, (d, theory) in corpus.items():
        assert H.check_hoare(d, theory), name
        vocab = vocabulary_of(d.conclusion)
        for _ in range(20):
            S = random_structure(vocab, rng.choice((1, 2, 3)), rng)
            if theory is None or satisfies_theory(S, theory.axioms):
                assert pca_valid_in(S, d.conclusion), name
