import random

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from hoarefl.model import (
    EvaluationError, Structure, all_structures, batches, eval_formula, eval_term, formula_table,
    pca_holds, pca_valid_in, program_table, random_structure, run_program, valuations,
)
from hoarefl.syntax import Vocabulary, free_vars
from hoarefl.text import parse_formula as F, parse_pca, parse_program as P, parse_term
from hoarefl.translate import translate_program
from conftest import CORPUS
from enumeration import PROGRAM_VOCAB, programs
from strategies import formulas, programs as program_strategy

TWO_CYCLE = Structure.from_json((CORPUS / "two_cycle.json").read_text())
VOCAB = Vocabulary((("f", 1), ("c", 0), ("d", 0)), (("P", 1), ("Q", 1)))


def test_term_lookup():
    assert eval_term(TWO_CYCLE, {"x": 0}, parse_term("f(x)")) == 1
    assert eval_term(TWO_CYCLE, {}, parse_term("c")) == 0
    assert eval_term(TWO_CYCLE, {"x": 0}, parse_term("f(f(x))")) == 0


def test_formula_examples():
    assert eval_formula(TWO_CYCLE, {"x": 1}, {}, F("x = x"))
    assert eval_formula(TWO_CYCLE, {"x": 1}, {}, F("forall2 R:1. R(x) -> R(x)"))
    m = translate_program(P("(x := f(x))*"), ("x",), outputs=("y",)).formula
    assert eval_formula(TWO_CYCLE, {"x": 0, "y": 1}, {}, m)


def test_simultaneous_assignment():
    S = Structure(2)
    assert run_program(S, {"x": 0, "y": 1}, P("x, y := y, x")) == [{"x": 1, "y": 0}]


def test_star_reaches_the_cycle():
    assert run_program(TWO_CYCLE, {"x": 0}, P("(x := f(x))*")) == [{"x": 0}, {"x": 1}]


def test_false_precondition_is_vacuous():
    assert pca_holds(TWO_CYCLE, {"x": 0}, parse_pca("{false} x := f(x) {false}"))


def test_corpus_pca_in_two_cycle():
    assert pca_valid_in(TWO_CYCLE, parse_pca((CORPUS / "loop1.pca").read_text()))
    assert not pca_valid_in(TWO_CYCLE, parse_pca("{true} x := f(x) {x = c}"))


def test_undefined_valuation_raises():
    with pytest.raises(EvaluationError):
        eval_formula(TWO_CYCLE, {}, {}, F("x = c"))
    with pytest.raises(EvaluationError):
        run_program(TWO_CYCLE, {}, P("x := f(x)"))


def test_relational_quantifier_limit():
    big = Structure(5)
    with pytest.raises(EvaluationError):
        eval_formula(big, {"x": 0, "y": 0}, {}, F("forall2 R:2. R(x, y) -> R(x, y)"))


def test_structure_json_validates_totality():
    doc = {"universe": 2, "functions": {"f": {"arity": 1, "table": {"0": 1}}}, "relations": {}}
    with pytest.raises(ValueError):
        Structure.from_json(doc)
    assert Structure.from_json(TWO_CYCLE.to_json()).to_json() == TWO_CYCLE.to_json()


def test_structure_enumeration_counts():
    vocab = Vocabulary((("f", 1), ("c", 0)), (("Q", 1),))
    sizes = [S.size for S in all_structures(vocab, 3)]
    assert sizes.count(1) == 2 and sizes.count(2) == 32 and sizes.count(3) == 27 * 3 * 8


@settings(max_examples=60, deadline=None)
@given(formulas(5), st.integers(1, 3), st.integers(0, 2**16))
def test_batched_formulas_agree_with_evaluation(p, size, seed):
    rng = random.Random(seed)
    structs = [random_structure(VOCAB, size, rng) for _ in range(4)]
    names = sorted(free_vars(p))
    (batch,) = batches(structs)
    table = formula_table(batch, p, names)
    for i, S in enumerate(structs):
        for env in valuations(S, names):
            assert table[(i,) + tuple(env[n] for n in names)] == eval_formula(S, env, {}, p)


@settings(max_examples=40, deadline=None)
@given(program_strategy(4), st.integers(1, 2), st.integers(0, 2**16))
def test_batched_programs_agree_with_runs(prog, size, seed):
    rng = random.Random(seed)
    structs = [random_structure(VOCAB, size, rng) for _ in range(3)]
    frame = ("x", "y", "z")
    (batch,) = batches(structs)
    table = program_table(batch, prog, frame)

    def state(env):
        return (env["x"] * size + env["y"]) * size + env["z"]
    for i, S in enumerate(structs):
        for a in valuations(S, frame):
            src = state(a)
            reach = {state(b) for b in run_program(S, a, prog)}
            assert set(np.flatnonzero(table[i, src])) == reach


def test_batched_programs_over_small_enumeration():
    structs = list(all_structures(PROGRAM_VOCAB, 2))
    for prog in programs(4):
        for batch in batches(structs):
            table = program_table(batch, prog, ("x",))
            for i, S in enumerate(batch.structures):
                for a in range(S.size):
                    reach = {e["x"] for e in run_program(S, {"x": a}, prog)}
                    assert set(np.flatnonzero(table[i, a])) == reach
