"""Cut-free sequent calculus for first-order logic and its comprehension extension.

Sequents are read as sets compared up to alpha-equivalence. A rule instance
is accepted when its principal formula occurs in the conclusion and every
premise is contained in the conclusion plus the rule's auxiliary formulas,
so weakening and contraction never need their own nodes.
"""
from __future__ import annotations

import sys
from dataclasses import dataclass, replace
from typing import Optional

from .syntax import (
    And, Bot, Eq, Exists, ForAll, ForAll2, Implies, Or, Predicate, Sequent, Top,
    Var, alpha_key, free_relvars, free_vars, is_first_order, is_negative_sequent,
    predicate_key, rename_relvar, substitute_predicate, substitute_terms,
)

FL = "FL"
FLPLUS = "FLplus"
CLASSICAL = "classical"
INTUITIONISTIC = "intuitionistic"

RULES = (
    "axiom", "thax", "thax-l", "refl", "repl-l", "repl-r", "and-l", "and-r", "or-l", "or-r",
    "imp-l", "imp-r", "bot-l", "top-r", "all-l", "all-r", "ex-l", "ex-r", "all2-l", "all2-r", "cut",
)

sys.setrecursionlimit(max(sys.getrecursionlimit(), 20000))


@dataclass(frozen=True)
class Theory:
    """Closed first-order axioms."""
    axioms: tuple = ()
    name: str = ""

    def __post_init__(self):
        for ax in self.axioms:
            if not is_first_order(ax) or free_vars(ax):
                raise ValueError("theory axioms must be closed first-order formulas")

    def keys(self) -> set:
        return {alpha_key(a) for a in self.axioms}

    def __iter__(self):
        return iter(self.axioms)

    def __len__(self):
        return len(self.axioms)


EMPTY_THEORY = Theory()


def as_theory(t) -> Theory:
    if t is None:
        return EMPTY_THEORY
    return t if isinstance(t, Theory) else Theory(tuple(t))


@dataclass(frozen=True)
class RuleSet:
    logic: str = FLPLUS
    mode: str = CLASSICAL
    allow_cut: bool = False


@dataclass(frozen=True, eq=False)
class Deriv:
    """One rule application; parameters not used by a rule stay ``None``.

    ``principal`` is the principal formula (cut formula for ``cut``, theory
    axiom for ``thax``/``thax-l``). ``term`` instantiates ``all-l``/``ex-r``;
    ``eigen`` names the eigenvariable (or eigen relation variable for
    ``all2-r``). ``pred`` is the eigen-predicate of ``all2-l`` or the one-hole
    context of the replacement rules, whose equation is ``lhs = rhs``.
    """
    rule: str
    conclusion: Sequent
    premises: tuple = ()
    principal: object = None
    term: object = None
    eigen: Optional[str] = None
    pred: Optional[Predicate] = None
    lhs: object = None
    rhs: object = None

    def reconclude(self, seq: Sequent) -> "Deriv":
        return replace(self, conclusion=seq)

    def nodes(self):
        stack = [self]
        while stack:
            d = stack.pop()
            yield d
            stack.extend(reversed(d.premises))

    def size(self) -> int:
        return sum(1 for _ in self.nodes())

    def rules_used(self) -> set:
        return {d.rule for d in self.nodes()}

    def sequents(self):
        for d in self.nodes():
            yield d.conclusion


@dataclass(frozen=True)
class Verdict:
    ok: bool
    reason: str = ""
    path: tuple = ()

    def __bool__(self):
        return self.ok

    def __str__(self):
        if self.ok:
            return "accepted"
        where = "/".join(map(str, self.path)) or "root"
        return f"rejected at {where}: {self.reason}"


ACCEPTED = Verdict(True)


class _Reject(Exception):
    def __init__(self, reason, path=()):
        super().__init__(reason)
        self.reason = reason
        self.path = path


# --------------------------------------------------------------------------
# rule instances

def _keys(fs) -> set:
    return {alpha_key(f) for f in fs}


def _need(cond, msg):
    if not cond:
        raise _Reject(msg)


def _principal_in(f, keys, where):
    _need(f is not None, "missing principal formula")
    _need(alpha_key(f) in keys, f"principal formula not in {where} of conclusion")


def expected_premises(d: Deriv, rules: RuleSet, theory: Theory) -> list:
    """Auxiliary formulas each premise may add, as (antecedent, succedent) pairs.

    Raises ``_Reject`` when the node does not instantiate its rule.
    """
    r, c, p = d.rule, d.conclusion, d.principal
    ante, succ = _keys(c.ante), _keys(c.succ)
    if r == "axiom":
        _principal_in(p, ante, "antecedent")
        _principal_in(p, succ, "succedent")
        return []
    if r == "thax":
        _principal_in(p, succ, "succedent")
        _need(alpha_key(p) in theory.keys(), "formula is not a theory axiom")
        return []
    if r == "thax-l":
        _need(p is not None and alpha_key(p) in theory.keys(), "formula is not a theory axiom")
        return [((p,), ())]
    if r == "refl":
        _principal_in(p, succ, "succedent")
        _need(isinstance(p, Eq) and p.lhs == p.rhs, "reflexivity needs t = t")
        return []
    if r == "bot-l":
        _principal_in(p, ante, "antecedent")
        _need(isinstance(p, Bot), "bot-l needs false")
        return []
    if r == "top-r":
        _principal_in(p, succ, "succedent")
        _need(isinstance(p, Top), "top-r needs true")
        return []
    if r in ("repl-l", "repl-r"):
        ctx = d.pred
        _need(ctx is not None and ctx.arity == 1, "replacement needs a one-hole context")
        _need(d.lhs is not None and d.rhs is not None, "replacement needs an equation")
        target = ctx.apply((d.rhs,))
        source = ctx.apply((d.lhs,))
        _need(p is None or alpha_key(p) == alpha_key(target), "principal formula is not ctx[rhs]")
        eq = Eq(d.lhs, d.rhs)
        if r == "repl-r":
            _principal_in(target, succ, "succedent")
            return [((), (eq,)), ((), (source,))]
        _principal_in(target, ante, "antecedent")
        return [((), (eq,)), ((source,), ())]
    if r == "cut":
        _need(rules.allow_cut, "cut is not allowed")
        _need(p is not None, "cut needs a cut formula")
        return [((), (p,)), ((p,), ())]
    if r in ("and-l", "or-l", "imp-l", "all-l", "ex-l", "all2-l"):
        _principal_in(p, ante, "antecedent")
    elif r in ("and-r", "or-r", "imp-r", "all-r", "ex-r", "all2-r"):
        _principal_in(p, succ, "succedent")
    else:
        raise _Reject(f"unknown rule {r!r}")
    shape = {"and-l": And, "and-r": And, "or-l": Or, "or-r": Or, "imp-l": Implies,
             "imp-r": Implies, "all-l": ForAll, "all-r": ForAll, "ex-l": Exists,
             "ex-r": Exists, "all2-l": ForAll2, "all2-r": ForAll2}[r]
    _need(isinstance(p, shape), f"{r} needs a {shape.__name__} principal formula")
    if r == "and-l":
        return [((p.left, p.right), ())]
    if r == "and-r":
        return [((), (p.left,)), ((), (p.right,))]
    if r == "or-l":
        return [((p.left,), ()), ((p.right,), ())]
    if r == "or-r":
        return [((), (p.left, p.right))]
    if r == "imp-l":
        return [((), (p.left,)), ((p.right,), ())]
    if r == "imp-r":
        return [((p.left,), (p.right,))]
    if r in ("all-l", "ex-r"):
        _need(d.term is not None, f"{r} needs an instantiation term")
        inst = substitute_terms(p.body, {p.var: d.term})
        return [((inst,), ())] if r == "all-l" else [((), (inst,))]
    if r in ("all-r", "ex-l"):
        y = d.eigen
        _need(y is not None, f"{r} needs an eigenvariable")
        _need(y not in free_vars(c), f"eigenvariable {y} is free in the conclusion")
        inst = substitute_terms(p.body, {p.var: Var(y)})
        return [((), (inst,))] if r == "all-r" else [((inst,), ())]
    # relational quantifier rules
    _need(rules.logic == FLPLUS, f"{r} is not a rule of {rules.logic}")
    if r == "all2-l":
        pred = d.pred
        _need(pred is not None, "all2-l needs an eigen-predicate")
        _need(pred.arity == p.arity, "eigen-predicate arity mismatch")
        _need(is_first_order(pred.body), "eigen-predicate must be first-order")
        return [((substitute_predicate(p.body, p.rel, pred),), ())]
    s = d.eigen
    _need(s is not None, "all2-r needs an eigen relation variable")
    _need(s not in free_relvars(c), f"relation variable {s} is free in the conclusion")
    return [((), (rename_relvar(p.body, p.rel, s) if s != p.rel else p.body,))]


def _check_node(d: Deriv, rules: RuleSet, theory: Theory):
    if rules.mode == INTUITIONISTIC and len(_keys(d.conclusion.succ)) > 1:
        raise _Reject("intuitionistic mode allows at most one succedent formula")
    aux = expected_premises(d, rules, theory)
    _need(len(aux) == len(d.premises),
          f"{d.rule} needs {len(aux)} premise(s), got {len(d.premises)}")
    ante, succ = _keys(d.conclusion.ante), _keys(d.conclusion.succ)
    for i, (prem, (aa, ss)) in enumerate(zip(d.premises, aux)):
        pa = ante | _keys(aa)
        ps = succ | _keys(ss)
        for f in prem.conclusion.ante:
            if alpha_key(f) not in pa:
                raise _Reject(f"premise {i} has an unexpected antecedent formula", ())
        for f in prem.conclusion.succ:
            if alpha_key(f) not in ps:
                raise _Reject(f"premise {i} has an unexpected succedent formula", ())


def check_derivation(d: Deriv, rules: RuleSet = RuleSet(), theory=None) -> Verdict:
    """Accept ``d`` iff every node instantiates a rule of ``rules``."""
    theory = as_theory(theory)
    seen: set = set()
    stack = [(d, ())]
    while stack:
        node, path = stack.pop()
        if id(node) in seen:
            continue
        try:
            _check_node(node, rules, theory)
        except _Reject as e:
            return Verdict(False, e.reason, path)
        seen.add(id(node))
        for i in range(len(node.premises) - 1, -1, -1):
            stack.append((node.premises[i], path + (i,)))
    return ACCEPTED


def end_sequent(d: Deriv) -> Sequent:
    return d.conclusion


def is_cut_free(d: Deriv) -> bool:
    return "cut" not in d.rules_used()


def uses_forall2(d: Deriv) -> bool:
    return bool(d.rules_used() & {"all2-l", "all2-r"})


def check_negativity(d: Deriv) -> Verdict:
    """Every sequent of ``d`` is negative."""
    stack = [(d, ())]
    while stack:
        node, path = stack.pop()
        if not is_negative_sequent(node.conclusion):
            from .text import print_sequent
            return Verdict(False, f"sequent is not negative: {print_sequent(node.conclusion)}", path)
        for i, p in enumerate(node.premises):
            stack.append((p, path + (i,)))
    return ACCEPTED


# --------------------------------------------------------------------------
# eigen-predicates

def collect_eigen_predicates(d: Deriv) -> tuple:
    """Eigen-predicates of all ``all2-l`` nodes in order, with closable side variables.

    A predicate's side variables are closed in the expansion unless they are
    free in the end-sequent.
    """
    from .translate import XiEntry
    end_fv = free_vars(d.conclusion)
    out, seen = [], set()

    def visit(node):
        if node.rule == "all2-l":
            key = predicate_key(node.pred)
            if key not in seen:
                seen.add(key)
                side = tuple(v for v in node.pred.side_vars() if v not in end_fv)
                out.append(XiEntry(node.pred, side))
        for p in node.premises:
            visit(p)

    visit(d)
    if len({e.arity for e in out}) > 1:
        raise ValueError("eigen-predicates of mixed arity")
    return tuple(out)


# --------------------------------------------------------------------------
# small builders

def seq(ante=(), succ=()) -> Sequent:
    return Sequent.of(tuple(ante), tuple(succ))


def add(s: Sequent, ante=(), succ=()) -> Sequent:
    return Sequent.of(s.ante + tuple(ante), s.succ + tuple(succ))


def free_in_derivation(d: Deriv) -> set:
    """Every free variable of every sequent in ``d`` plus all eigenvariables."""
    out: set = set()
    for node in d.nodes():
        out |= free_vars(node.conclusion)
        if node.eigen:
            out.add(node.eigen)
    return out

