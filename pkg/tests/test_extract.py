import pytest
from hypothesis import given, settings, strategies as st

from hoarefl import hoare as H
from hoarefl.compile import compile_hoare_to_flp
from hoarefl.formats import deriv_to_json
from hoarefl.extract import (
    ExtractionError, InterpolationError, Partition, colorings, expand_derivation, extract_hoare,
    interpolate, invert_and_l, invert_imp_r, invert_or_l, unexpand, vocabulary_ok,
)
from hoarefl.prover import prove_fo
from hoarefl.sequent import (
    FL, FLPLUS, Deriv, RuleSet, check_derivation, collect_eigen_predicates, is_cut_free, uses_forall2,
)
from hoarefl.syntax import FALSE, Predicate, Sequent, Seq, Star, Test as Guard, Union
from hoarefl.text import parse_formula as F, parse_pca, parse_program as P, parse_sequent as S, print_formula, print_program
from hoarefl.translate import XiEntry, expand_sequent
from enumeration import programs
from strategies import formulas

FL_RULES = RuleSet(FL)


# expansion ---------------------------------------------------------------

def test_first_order_derivations_are_unchanged():
    d = prove_fo(S("P(c), forall x. P(x) -> Q(x) |- Q(c)"), 3)
    assert deriv_to_json(expand_derivation(d, ())) == deriv_to_json(d)


@pytest.mark.parametrize("name, size", [("loop1", 1), ("nested", 2)])
def test_expanded_derivations_are_first_order(compiled, name, size):
    d = compiled[name]
    xi = collect_eigen_predicates(d)
    assert len(xi) == size
    e = expand_derivation(d, xi)
    assert not uses_forall2(e) and is_cut_free(e)
    assert check_derivation(e, FL_RULES)
    assert e.conclusion == expand_sequent(d.conclusion, xi)


def test_expansion_rejects_cuts():
    a = F("P(c)")
    ax = prove_fo(S("P(c) |- P(c)"), 1)
    cut = Deriv("cut", S("P(c) |- P(c)"), (ax, ax), principal=a)
    with pytest.raises(ExtractionError):
        expand_derivation(cut, ())


def test_unexpand_hand_example():
    sigma = S("forall2 R:1. R(x) -> R(y) |- x = y")
    xi = (XiEntry(Predicate(("u",), F("u = x")), ()),)
    fl = prove_fo(S("x = x -> y = x |- x = y"), 4)
    d = unexpand(fl, sigma, xi)
    assert d.conclusion == sigma
    assert sum(1 for n in d.nodes() if n.rule == "cut") == 1
    assert check_derivation(d, RuleSet(FLPLUS, allow_cut=True))
    assert not check_derivation(d, RuleSet(FLPLUS))


def test_unexpand_first_order_is_identity():
    fl = prove_fo(S("P(c) |- P(c) | Q(c)"), 3)
    assert deriv_to_json(unexpand(fl, fl.conclusion, ())) == deriv_to_json(fl)


# interpolation -----------------------------------------------------------

def _check_interpolant(d, p, theory=None):
    it = interpolate(d, p, theory)
    assert vocabulary_ok(it.formula, p)
    la, ls = set(p.left.ante), set(p.left.succ) | {it.formula}
    ra, rs = set(p.right.ante) | {it.formula}, set(p.right.succ)
    assert set(it.left.conclusion.ante) <= la and set(it.left.conclusion.succ) <= ls
    assert set(it.right.conclusion.ante) <= ra and set(it.right.conclusion.succ) <= rs
    assert check_derivation(it.left, FL_RULES) and check_derivation(it.right, FL_RULES)
    return it


def test_interpolant_of_an_axiom():
    d = prove_fo(S("A(c) |- A(c)"), 1)
    p = Partition(S("A(c) |-"), S("|- A(c)"))
    assert print_formula(_check_interpolant(d, p).formula) == "A(c)"


def test_interpolant_drops_unshared_conjunct():
    d = prove_fo(S("P(c) & Q(c) |- Q(c) | R(c)"), 4)
    p = Partition(S("P(c) & Q(c) |-"), S("|- Q(c) | R(c)"))
    assert print_formula(_check_interpolant(d, p).formula) == "Q(c)"


def test_interpolant_of_modus_ponens():
    d = prove_fo(S("P(c), P(c) -> Q(c) |- Q(c)"), 4)
    p = Partition(S("P(c) |-"), S("P(c) -> Q(c) |- Q(c)"))
    assert print_formula(_check_interpolant(d, p).formula) == "P(c)"


def test_interpolant_quantifies_unshared_constants():
    d = prove_fo(S("forall x. P(x) |- P(c) | Q(d)"), 4)
    p = Partition(S("forall x. P(x) |-"), S("|- P(c) | Q(d)"))
    it = _check_interpolant(d, p)
    assert "c" not in print_formula(it.formula).replace("forall", "")


def test_interpolation_rejects_foreign_partitions():
    d = prove_fo(S("P(c) |- P(c)"), 1)
    with pytest.raises(InterpolationError):
        interpolate(d, Partition(S("Q(c) |-"), S("|- P(c)")))


@settings(max_examples=120, deadline=None)
@given(formulas(4), formulas(4), st.integers(0, 3))
def test_interpolants_for_random_proofs(a, b, mask):
    d = prove_fo(Sequent((a,), (b,)), 2)
    if d is None:
        return
    p = Partition.split(d.conclusion, [0] if mask & 1 else [], [0] if mask & 2 else [])
    _check_interpolant(d, p)


def test_all_colorings_are_partitions():
    s = S("P(c), Q(c) |- R(c)")
    parts = list(colorings(s))
    assert len(parts) == 8
    assert all(p.covers(s) for p in parts)


# inversion ---------------------------------------------------------------

def test_inversions_check():
    d = prove_fo(S("P(c) & Q(c) |- Q(c)"), 3)
    inv = invert_and_l(d, F("P(c) & Q(c)"))
    assert check_derivation(inv, FL_RULES)
    assert F("Q(c)") in inv.conclusion.ante or F("P(c)") in inv.conclusion.ante
    d = prove_fo(S("P(c) | Q(c) |- Q(c) | P(c)"), 3)
    for part in invert_or_l(d, F("P(c) | Q(c)")):
        assert check_derivation(part, FL_RULES)
    d = prove_fo(S("|- P(c) -> P(c) | Q(c)"), 3)
    assert check_derivation(invert_imp_r(d, F("P(c) -> P(c) | Q(c)")), FL_RULES)


# extraction --------------------------------------------------------------

def _roundtrip(d, theory=None, depth=8):
    out = extract_hoare(compile_hoare_to_flp(d, theory), d.conclusion, theory, depth)
    assert out.conclusion == d.conclusion
    assert H.check_hoare(out, theory, depth)
    return out


def test_extracted_assignment():
    out = _roundtrip(H.assignment(P("x := f(x)"), F("x = c")))
    assert out.count("Assignment") == 1 and out.size() <= 2


def test_extracted_loop_has_one_iteration(corpus):
    d, _ = corpus["loop1"]
    assert _roundtrip(d).count("Iteration") == 1


def test_extracted_nested_loops(corpus):
    d, _ = corpus["nested"]
    assert _roundtrip(d).count("Iteration") == 2


def vacuous(prog):
    """A derivation of {false} prog {false}."""
    if isinstance(prog, Guard):
        return H.test(FALSE, prog.cond, FALSE)
    if isinstance(prog, Seq):
        return H.compose(vacuous(prog.first), vacuous(prog.second))
    if isinstance(prog, Union):
        return H.union(vacuous(prog.left), vacuous(prog.right))
    if isinstance(prog, Star):
        return H.iterate(vacuous(prog.body))
    return H.assignment(prog, FALSE)


@pytest.mark.parametrize("prog", programs(3), ids=print_program)
def test_false_precondition_for_every_construct(prog):
    post = F("Q(x)")
    d = H.consequence(FALSE, vacuous(prog), post)
    assert H.check_hoare(d)
    _roundtrip(d)


def test_extraction_needs_the_matching_pca(compiled):
    with pytest.raises(ExtractionError):
        extract_hoare(compiled["assign"], parse_pca("{true} x := c {x = c}"))
