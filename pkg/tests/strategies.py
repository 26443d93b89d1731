"""Hypothesis strategies for terms, formulas and programs over a small vocabulary."""
from hypothesis import strategies as st

from hoarefl.syntax import (
    And, App, Assign, Eq, Exists, ForAll, Implies, Or, Rel, Seq, Star, Test, Union, Var,
)

VARS = ("x", "y", "z")
CONSTS = ("c", "d")


def terms(max_depth: int = 2):
    base = st.one_of(st.sampled_from(VARS).map(Var), st.sampled_from(CONSTS).map(lambda n: App(n, ())))
    if max_depth == 0:
        return base
    return st.one_of(base, terms(max_depth - 1).map(lambda t: App("f", (t,))))


def atoms():
    return st.one_of(
        st.builds(Eq, terms(), terms()),
        terms().map(lambda t: Rel("P", (t,))),
        terms().map(lambda t: Rel("Q", (t,))),
    )


def formulas(max_leaves: int = 6):
    def extend(inner):
        return st.one_of(
            st.builds(And, inner, inner),
            st.builds(Or, inner, inner),
            st.builds(Implies, inner, inner),
            st.builds(ForAll, st.sampled_from(VARS), inner),
            st.builds(Exists, st.sampled_from(VARS), inner),
        )
    return st.recursive(atoms(), extend, max_leaves=max_leaves)


def quantifier_free(max_leaves: int = 6):
    def extend(inner):
        return st.one_of(st.builds(And, inner, inner), st.builds(Or, inner, inner),
                         st.builds(Implies, inner, inner))
    return st.recursive(atoms(), extend, max_leaves=max_leaves)


def programs(max_leaves: int = 5, frame=("x", "y")):
    assign = st.builds(lambda v, t: Assign((v,), (t,)), st.sampled_from(frame), terms(1))
    test = quantifier_free(2).map(Test)

    def extend(inner):
        return st.one_of(st.builds(Seq, inner, inner), st.builds(Union, inner, inner), inner.map(Star))
    return st.recursive(st.one_of(assign, test), extend, max_leaves=max_leaves)
