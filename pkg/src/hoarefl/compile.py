"""Hoare derivations to cut-free, single-succedent sequent derivations of the pca formula.

The translation of the program sits in the antecedent and is taken apart
along the Hoare derivation: existentials of a composition by ``ex-l``,
unions by ``or-l``, each iteration by one ``all2-l`` whose eigen-predicate
is the loop invariant. Work after a construct is passed on as a
continuation, so no intermediate fact is ever cut in; first-order glue
goals are discharged from the accumulated antecedent by the prover.
"""
from __future__ import annotations

from .hoare import DEFAULT_DEPTH, HoareDerivation
from .prover import prove_fo
from .sequent import INTUITIONISTIC, Deriv, as_theory
from .syntax import (
    And, Exists, ForAll, ForAll2, Implies, Or, Predicate, Sequent, Var, free_vars,
    is_first_order, program_vars, substitute_predicate, substitute_terms,
)
from .text import print_sequent
from .translate import Namer, all_names, pca_parts


class CompileError(ValueError):
    pass


def _is_literal(f) -> bool:
    return not isinstance(f, (And, Or, Implies, ForAll, Exists, ForAll2))


def _seq(ante, goal) -> Sequent:
    return Sequent.of(tuple(ante), (goal,))


class _Compiler:
    def __init__(self, frame, theory, depth, avoid):
        self.frame = tuple(frame)
        self.theory = theory
        self.depth = depth
        self.namer = Namer(avoid)

    # helpers
    def at(self, formula, vec):
        return substitute_terms(formula, {x: Var(n) for x, n in zip(self.frame, vec) if x != n})

    def eigen(self, name, ante, goal):
        busy = free_vars(_seq(ante, goal))
        return name if name not in busy else self.namer.name("w")

    def glue(self, ante, goal) -> Deriv:
        # the literals usually suffice and keep the search small
        fo = tuple(f for f in ante if is_first_order(f))
        lits = tuple(f for f in fo if _is_literal(f))
        for part in ((lits, fo) if lits and lits != fo else (fo,)):
            s = _seq(part, goal)
            d = prove_fo(s, self.depth, self.theory, INTUITIONISTIC)
            if d is not None:
                return d
        raise CompileError(f"glue obligation unproven at depth {self.depth}: {print_sequent(s)}")

    def split_and(self, ante, f, goal, k) -> Deriv:
        """``and-l`` all the way down a conjunction, then ``k`` on the enlarged antecedent."""
        if not isinstance(f, And):
            return k(ante)
        inner = tuple(ante) + (f.left, f.right)

        def rest(a1):
            return self.split_and(a1, f.right, goal, k)
        sub = self.split_and(inner, f.left, goal, rest)
        return Deriv("and-l", _seq(ante, goal), (sub,), principal=f)

    # one Hoare node; ``m`` is its program's translation, already in ``ante``
    def node(self, hd: HoareDerivation, ante, m, goal, k) -> Deriv:
        rule = hd.rule
        if rule == "Consequence":
            return self.node(hd.premises[0], ante, m, goal, k)
        if rule in ("Assignment", "Test"):
            return self.split_and(ante, m, goal, k)
        if rule == "Composition":
            return self.composition(hd, ante, m, goal, k)
        if rule == "Union":
            if not isinstance(m, Or):
                raise CompileError("union translation is not a disjunction")
            subs = tuple(self.node(p, tuple(ante) + (part,), part, goal, k)
                         for p, part in zip(hd.premises, (m.left, m.right)))
            return Deriv("or-l", _seq(ante, goal), subs, principal=m)
        if rule == "Iteration":
            return self.iteration(hd, ante, m, goal, k)
        raise CompileError(f"unknown Hoare rule {rule!r}")

    def composition(self, hd, ante, m, goal, k) -> Deriv:
        chain = []
        cur_ante, f = tuple(ante), m
        for _ in self.frame:
            if not isinstance(f, Exists):
                raise CompileError("composition translation lacks its existential prefix")
            y = self.eigen(f.var, cur_ante, goal)
            inst = substitute_terms(f.body, {f.var: Var(y)})
            chain.append((cur_ante, f, y))
            cur_ante = cur_ante + (inst,)
            f = inst
        if not isinstance(f, And):
            raise CompileError("composition translation is not a conjunction")
        first, second = hd.premises
        mb, mg = f.left, f.right
        a2 = cur_ante + (mb, mg)

        def then(a3):
            return self.node(second, a3, mg, goal, k)
        d = Deriv("and-l", _seq(cur_ante, goal), (self.node(first, a2, mb, goal, then),), principal=f)
        for a, g, y in reversed(chain):
            d = Deriv("ex-l", _seq(a, goal), (d,), principal=g, eigen=y)
        return d

    def iteration(self, hd, ante, m, goal, k) -> Deriv:
        if not isinstance(m, ForAll2):
            raise CompileError("iteration translation is not a relational quantifier")
        inv = hd.conclusion.pre
        ps = self.namer.vector("p", len(self.frame))
        pred = Predicate(tuple(ps), self.at(inv, ps))
        inst = substitute_predicate(m.body, m.rel, pred)
        if not (isinstance(inst, Implies) and isinstance(inst.left, And)):
            raise CompileError("unexpected iteration translation")
        cl, inv_in, inv_out = inst.left.left, inst.left.right, inst.right
        a1 = tuple(ante) + (inst,)
        closed = self.closure(hd.premises[0], a1, cl)
        entry = self.glue(a1, inv_in)
        left = Deriv("and-r", _seq(a1, inst.left), (closed, entry), principal=inst.left)
        right = k(a1 + (inv_out,))
        step = Deriv("imp-l", _seq(a1, goal), (left, right), principal=inst)
        return Deriv("all2-l", _seq(ante, goal), (step,), principal=m, pred=pred)

    def closure(self, body: HoareDerivation, ante, cl) -> Deriv:
        """Proof of the instantiated closure condition from the body's derivation."""
        chain, f, cur = [], cl, tuple(ante)
        while isinstance(f, ForAll):
            y = self.eigen(f.var, cur, f)
            chain.append((f, y))
            f = substitute_terms(f.body, {f.var: Var(y)})
        if not (isinstance(f, Implies) and isinstance(f.left, And)):
            raise CompileError("unexpected closure condition")
        inv_u, mb, inv_v = f.left.left, f.left.right, f.right
        a1 = cur + (f.left,)
        a2 = a1 + (inv_u, mb)
        inner = self.node(body, a2, mb, inv_v, lambda a: self.glue(a, inv_v))
        d = Deriv("and-l", _seq(a1, inv_v), (inner,), principal=f.left)
        d = Deriv("imp-r", _seq(cur, f), (d,), principal=f)
        for g, y in reversed(chain):
            d = Deriv("all-r", _seq(cur, g), (d,), principal=g, eigen=y)
        return d


def compile_hoare_to_flp(d: HoareDerivation, theory=None, depth: int = DEFAULT_DEPTH) -> Deriv:
    """Cut-free derivation of ``|- pca formula`` for the conclusion of ``d``."""
    theory = as_theory(theory)
    pca = d.conclusion
    parts = pca_parts(pca)
    frame = tuple(program_vars(pca.prog))
    avoid = all_names(parts.formula)
    for ax in theory:
        avoid |= all_names(ax)
    c = _Compiler(frame, theory, depth, avoid)
    post_v = c.at(pca.post, parts.outputs)
    body = parts.formula
    chain = []
    while isinstance(body, ForAll):
        chain.append(body)
        body = body.body
    # body is  pre & M -> post[v]
    hyp = body.left
    ante0 = (hyp, hyp.left, hyp.right)

    def finish(a):
        return c.glue(a, post_v)
    core = c.split_and(ante0, hyp.left, post_v,
                       lambda a: c.node(d, a, hyp.right, post_v, finish))
    core = Deriv("and-l", _seq((hyp,), post_v), (core,), principal=hyp)
    out = Deriv("imp-r", Sequent((), (body,)), (core,), principal=body)
    for g in reversed(chain):
        out = Deriv("all-r", Sequent((), (g,)), (out,), principal=g, eigen=g.var)
    return out
