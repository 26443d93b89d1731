import random
import warnings

import pytest

from hoarefl.model import batches, formula_table, random_structure, vocabulary_of
from hoarefl.sequent import collect_eigen_predicates
from hoarefl.syntax import (
    NONE, POSITIVE_ONLY, ForAll2, Predicate, alpha_eq, forall2_polarity, free_vars, is_first_order,
)
from hoarefl.text import parse_formula as F, parse_pca, parse_program as P, print_formula
from hoarefl.translate import (
    TranslationError, XiEntry, closure_formula, expand_formula, make_xi, pca_parts, translate_pca,
    translate_program,
)


def text(p):
    return print_formula(p)


def test_assignment():
    assert text(translate_program(P("x := c"), ("x",)).formula) == "y1 = c"


def test_assignment_keeps_other_frame_positions():
    t = translate_program(P("x := f(y)"), ("x", "y"))
    assert text(t.formula) == "y1 = f(y) & y2 = y"


def test_test():
    assert text(translate_program(P("?x = c"), ("x",)).formula) == "x = c & y1 = x"


def test_iteration_shape():
    m = translate_program(P("(x := f(x))*"), ("x",)).formula
    assert isinstance(m, ForAll2) and m.arity == 1
    expected = F("forall2 R:1. (forall u, v. R(u) & v = f(u) -> R(v)) & R(x) -> R(y1)")
    assert alpha_eq(m, expected)


def test_composition_mints_intermediate_vector():
    t = translate_program(P("x := c ; x := f(x)"), ("x",))
    assert t.auxiliary == ("z1",)
    assert text(t.formula) == "exists z1. z1 = c & y1 = f(z1)"


def test_closure_examples():
    cl = closure_formula(P("x := c"), "R")
    assert alpha_eq(cl, F("forall2 R:1. forall u, v. R(u) & v = c -> R(v)").body)
    vacuous = closure_formula(P("?false"), "R", ("x",))
    assert alpha_eq(vacuous, F("forall2 R:1. forall u, v. R(u) & false & v = u -> R(v)").body)


def test_frame_must_cover_program():
    with pytest.raises(TranslationError):
        translate_program(P("x := f(y)"), ("x",))
    with pytest.raises(TranslationError):
        translate_program(P("x := c"), ("x", "x"))


def test_pca_closure_order():
    pca = parse_pca("{Q(a) & x = w} x := f(x) {x = w}")
    parts = pca_parts(pca)
    assert parts.frame == ("x",) and parts.side == ("w",)
    assert text(parts.formula) == "forall x, v1, w. (Q(a) & x = w) & v1 = f(x) -> v1 = w"


def test_pca_with_program_free_of_variables():
    # the frame holds program variables only; the precondition's x is a side variable
    assert text(translate_pca(parse_pca("{x = c} ?true {x = c}"))) == "forall x. x = c & true & true -> x = c"


def test_expansion_without_relational_quantifiers_is_identity():
    p = F("forall x. P(x) -> Q(x)")
    assert expand_formula(p, [Predicate(("u",), F("P(u)"))]) == p


def test_expansion_single_instance():
    p = F("forall2 R:1. R(x) -> R(y)")
    pred = Predicate(("u",), F("u = x"))
    assert text(expand_formula(p, [XiEntry(pred, ())])) == "x = x -> y = x"
    closed = expand_formula(p, [XiEntry(pred, ("x",))])
    assert alpha_eq(closed, F("forall w. x = w -> y = w"))


def test_expansion_conjoins_every_entry():
    p = F("forall2 R:1. R(x) -> R(y)")
    xi = [Predicate(("u",), F("P(u)")), Predicate(("u",), F("Q(u)"))]
    assert text(expand_formula(p, xi)) == "(P(x) -> P(y)) & (Q(x) -> Q(y))"


def test_empty_xi_gives_true_with_warning():
    with warnings.catch_warnings(record=True) as caught:
        warnings.simplefilter("always")
        assert text(expand_formula(F("forall2 R:1. R(x)"), [])) == "true"
    assert caught


def test_xi_must_be_first_order_and_uniform():
    with pytest.raises(TranslationError):
        make_xi([Predicate(("u",), F("forall2 S:1. S(u)"))])
    with pytest.raises(TranslationError):
        make_xi([Predicate(("u",), F("P(u)")), Predicate(("u", "v"), F("u = v"))])


def test_program_translations_are_positive(corpus):
    for d, _ in corpus.values():
        pca = d.conclusion
        assert forall2_polarity(translate_program(pca.prog).formula) in (POSITIVE_ONLY, NONE)


def test_expansion_is_implied_on_small_structures(corpus, compiled):
    rng = random.Random(7)
    for name, (d, theory) in corpus.items():
        xi = collect_eigen_predicates(compiled[name])
        m = translate_program(d.conclusion.prog).formula
        ex = expand_formula(m, xi)
        assert is_first_order(ex)
        vocab = vocabulary_of(m, *(e.pred.body for e in xi))
        names = sorted(free_vars(m) | free_vars(ex))
        structs = [random_structure(vocab, n, rng) for n in (1, 2) for _ in range(20)]
        for batch in batches(structs):
            assert not (formula_table(batch, m, names) & ~formula_table(batch, ex, names)).any(), name
