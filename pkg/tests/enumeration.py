"""Deterministic enumerations shared by the property tests."""
from __future__ import annotations

import itertools

from hoarefl.syntax import Seq, Sequent, Star, Union, Vocabulary
from hoarefl.text import parse_formula, parse_program

PROGRAM_ATOMS = ("x := f(x)", "x := c", "?Q(x)", "?~Q(x)")
PROGRAM_VOCAB = Vocabulary((("f", 1), ("c", 0)), (("Q", 1),))


def programs_by_size(max_size: int, atoms=PROGRAM_ATOMS) -> dict:
    """All programs over ``atoms`` keyed by AST size (assignments and tests count 1)."""
    by = {1: [parse_program(a) for a in atoms]}
    for n in range(2, max_size + 1):
        out = [Star(p) for p in by[n - 1]]
        for i in range(1, n - 1):
            for a in by[i]:
                for b in by[n - 1 - i]:
                    out += [Seq(a, b), Union(a, b)]
        by[n] = out
    return by


def programs(max_size: int, atoms=PROGRAM_ATOMS) -> list:
    by = programs_by_size(max_size, atoms)
    return [p for n in sorted(by) for p in by[n]]


FORMULA_POOL = tuple(parse_formula(s) for s in (
    "P(c)", "Q(c)", "P(d)", "P(f(c))", "c = d", "f(c) = d",
    "~P(c)", "P(c) & Q(c)", "P(c) | Q(d)", "P(c) -> Q(c)", "P(d) -> P(f(c))",
    "forall x. P(x)", "exists x. Q(x)", "forall x. P(x) -> Q(x)",
    "forall x. P(f(x))", "exists x. P(x) & Q(x)", "forall x. x = c",
))


def sequents(max_formulas: int = 4, pool=FORMULA_POOL):
    """Sequents over ``pool`` with 2..max_formulas distinct formulas, in a fixed order."""
    for k in range(2, max_formulas + 1):
        for combo in itertools.combinations(pool, k):
            for cut in range(1, k):
                yield Sequent(combo[:cut], combo[cut:])


def derivation_corpus(count: int, depth: int = 3, max_formulas: int = 4):
    """The first ``count`` sequents of :func:`sequents` that ``prove_fo`` proves, with their proofs."""
    from hoarefl.prover import prove_fo
    out = []
    for s in sequents(max_formulas):
        d = prove_fo(s, depth)
        if d is not None:
            out.append(d)
            if len(out) >= count:
                break
    return out
