"""Hoare-logic derivations for regular programs and their checker."""
from __future__ import annotations

from dataclasses import dataclass
from typing import Optional, Union as U

from .prover import prove_fo
from .sequent import CLASSICAL, FL, Deriv, RuleSet, Theory, as_theory, check_derivation
from .syntax import (
    And, Assign, Implies, Pca, Seq, Sequent, Star, Test, Union, alpha_eq, alpha_key,
    is_first_order, is_negation, Not, substitute_terms,
)

RULES = ("Assignment", "Test", "Composition", "Union", "Iteration", "Consequence")
DEFAULT_DEPTH = 6


@dataclass(frozen=True)
class Auto:
    """Side condition left to the bounded prover; ``None`` defers to the checker's depth."""
    depth: Optional[int] = None

    def __str__(self):
        return "auto" if self.depth is None else f"auto:{self.depth}"


@dataclass(frozen=True)
class SideWitness:
    goal: object
    witness: U[Auto, Deriv] = Auto()


@dataclass(frozen=True, eq=False)
class HoareDerivation:
    rule: str
    conclusion: Pca
    premises: tuple = ()
    sides: tuple = ()

    def nodes(self):
        yield self
        for p in self.premises:
            yield from p.nodes()

    def size(self) -> int:
        return sum(1 for _ in self.nodes())

    def count(self, rule: str) -> int:
        return sum(1 for n in self.nodes() if n.rule == rule)


@dataclass(frozen=True)
class HoareVerdict:
    ok: bool
    reason: str = ""
    path: tuple = ()

    def __bool__(self):
        return self.ok

    def __str__(self):
        if self.ok:
            return "accepted"
        return f"rejected at {'/'.join(map(str, self.path)) or 'root'}: {self.reason}"


class _Fail(Exception):
    def __init__(self, reason, path):
        super().__init__(reason)
        self.reason = reason
        self.path = path


# --------------------------------------------------------------------------
# side goals

def test_goal(pca: Pca):
    return Implies(And(pca.pre, pca.prog.cond), pca.post)


def consequence_goals(pca: Pca, premise: Pca):
    return Implies(pca.pre, premise.pre), Implies(premise.post, pca.post)


def assignment_pre(prog: Assign, post):
    return substitute_terms(post, dict(zip(prog.targets, prog.terms)))


def side_holds(side: SideWitness, theory: Theory, depth: int) -> str:
    """Empty string when the side goal is established, else the reason it is not."""
    if not is_first_order(side.goal):
        return "side condition is not first-order"
    w = side.witness
    if isinstance(w, Auto):
        n = depth if w.depth is None else w.depth
        d = prove_fo(Sequent((), (side.goal,)), n, theory, CLASSICAL)
        return "" if d is not None else f"side condition unproven at depth {n}"
    end = w.conclusion
    if end.ante or len(end.succ) != 1 or not alpha_eq(end.succ[0], side.goal):
        return "side witness does not prove the side goal"
    v = check_derivation(w, RuleSet(FL, CLASSICAL, False), theory)
    return "" if v else f"side witness rejected: {v}"


# --------------------------------------------------------------------------
# checking

def _expect(cond, reason, path):
    if not cond:
        raise _Fail(reason, path)


def _check(d: HoareDerivation, theory, depth, path):
    c = d.conclusion
    r = d.rule
    _expect(r in RULES, f"unknown rule {r!r}", path)
    n_prem = {"Assignment": 0, "Test": 0, "Composition": 2, "Union": 2, "Iteration": 1,
              "Consequence": 1}[r]
    n_side = {"Assignment": 0, "Test": 1, "Consequence": 2}.get(r, 0)
    _expect(len(d.premises) == n_prem, f"{r} needs {n_prem} premise(s)", path)
    _expect(len(d.sides) == n_side, f"{r} needs {n_side} side condition(s)", path)
    prem = [p.conclusion for p in d.premises]
    goals = []
    if r == "Assignment":
        _expect(isinstance(c.prog, Assign), "Assignment needs an assignment", path)
        _expect(alpha_eq(c.pre, assignment_pre(c.prog, c.post)),
                "precondition is not the postcondition with the assignment substituted", path)
    elif r == "Test":
        _expect(isinstance(c.prog, Test), "Test needs a test program", path)
        goals = [test_goal(c)]
    elif r == "Composition":
        _expect(isinstance(c.prog, Seq), "Composition needs a sequence", path)
        _expect(prem[0].prog == c.prog.first and prem[1].prog == c.prog.second,
                "premise programs do not match", path)
        _expect(alpha_eq(prem[0].pre, c.pre), "precondition mismatch", path)
        _expect(alpha_eq(prem[1].post, c.post), "postcondition mismatch", path)
        _expect(alpha_eq(prem[0].post, prem[1].pre), "midcondition mismatch", path)
    elif r == "Union":
        _expect(isinstance(c.prog, Union), "Union needs a union", path)
        _expect(prem[0].prog == c.prog.left and prem[1].prog == c.prog.right,
                "premise programs do not match", path)
        for p in prem:
            _expect(alpha_eq(p.pre, c.pre) and alpha_eq(p.post, c.post),
                    "premises must share pre- and postcondition", path)
    elif r == "Iteration":
        _expect(isinstance(c.prog, Star), "Iteration needs a star", path)
        _expect(alpha_eq(c.pre, c.post), "Iteration needs an invariant", path)
        _expect(prem[0].prog == c.prog.body, "premise program does not match", path)
        _expect(alpha_eq(prem[0].pre, c.pre) and alpha_eq(prem[0].post, c.pre),
                "premise must preserve the invariant", path)
    else:
        _expect(prem[0].prog == c.prog, "premise program does not match", path)
        goals = list(consequence_goals(c, prem[0]))
    for i, (side, goal) in enumerate(zip(d.sides, goals)):
        _expect(alpha_eq(side.goal, goal), f"side condition {i} has the wrong goal", path)
        why = side_holds(side, theory, depth)
        _expect(not why, why, path)
    for i, p in enumerate(d.premises):
        _check(p, theory, depth, path + (i,))


def check_hoare(d: HoareDerivation, theory=None, depth: int = DEFAULT_DEPTH) -> HoareVerdict:
    try:
        _check(d, as_theory(theory), depth, ())
    except _Fail as f:
        return HoareVerdict(False, f.reason, f.path)
    return HoareVerdict(True)


# --------------------------------------------------------------------------
# constructors

def assignment(prog: Assign, post) -> HoareDerivation:
    return HoareDerivation("Assignment", Pca(assignment_pre(prog, post), prog, post))


def test(pre, cond, post, witness=None) -> HoareDerivation:
    pca = Pca(pre, Test(cond), post)
    return HoareDerivation("Test", pca, (), (SideWitness(test_goal(pca), witness or Auto()),))


def compose(first: HoareDerivation, second: HoareDerivation) -> HoareDerivation:
    a, b = first.conclusion, second.conclusion
    return HoareDerivation("Composition", Pca(a.pre, Seq(a.prog, b.prog), b.post), (first, second))


def union(left: HoareDerivation, right: HoareDerivation) -> HoareDerivation:
    a, b = left.conclusion, right.conclusion
    return HoareDerivation("Union", Pca(a.pre, Union(a.prog, b.prog), a.post), (left, right))


def iterate(body: HoareDerivation) -> HoareDerivation:
    b = body.conclusion
    return HoareDerivation("Iteration", Pca(b.pre, Star(b.prog), b.post), (body,))


def consequence(pre, premise: HoareDerivation, post, witnesses=(None, None)) -> HoareDerivation:
    pca = Pca(pre, premise.conclusion.prog, post)
    g1, g2 = consequence_goals(pca, premise.conclusion)
    sides = (SideWitness(g1, witnesses[0] or Auto()), SideWitness(g2, witnesses[1] or Auto()))
    return HoareDerivation("Consequence", pca, (premise,), sides)


def negate(p):
    """``A`` for ``~A``, otherwise ``~p``."""
    return p.left if is_negation(p) else Not(p)


def derive_while(inv, guard, body: HoareDerivation, depth: int = DEFAULT_DEPTH) -> HoareDerivation:
    """Derivation of ``{inv} (?guard; body)*; ?~guard {inv & ~guard}``.

    ``body`` should conclude ``{inv & guard} body {inv}``; a Consequence node
    with prover-discharged sides bridges any other pre/postcondition.
    """
    entry = And(inv, guard)
    b = body.conclusion
    if not (alpha_eq(b.pre, entry) and alpha_eq(b.post, inv)):
        body = consequence(entry, body, inv, (Auto(depth), Auto(depth)))
    step = compose(test(inv, guard, entry, Auto(depth)), body)
    exit_cond = negate(guard)
    return compose(iterate(step), test(inv, exit_cond, And(inv, exit_cond), Auto(depth)))


def conclusion_key(d: HoareDerivation):
    c = d.conclusion
    return (alpha_key(c.pre), c.prog, alpha_key(c.post))
