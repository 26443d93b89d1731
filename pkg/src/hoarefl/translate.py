"""Programs and pcas as second-order formulas; Xi-expansion back to first order."""
from __future__ import annotations

import warnings
from dataclasses import dataclass

from .syntax import (
    And, App, Assign, Eq, Exists, ForAll, ForAll2, Implies, Or, Pca, Predicate, Rel,
    RelVar, Seq, Sequent, Star, Test, Union, Var, conj, forall_many, exists_many,
    free_vars, is_negative_sequent, program_vars, substitute_predicate, substitute_terms,
)


class TranslationError(ValueError):
    pass


# --------------------------------------------------------------------------
# fresh names

def all_names(e) -> set:
    """Every individual variable name in ``e``, free or bound."""
    out: set = set()

    def term(t):
        if isinstance(t, Var):
            out.add(t.name)
        else:
            for a in t.args:
                term(a)

    def walk(x):
        if isinstance(x, (Var, App)):
            term(x)
        elif isinstance(x, (Eq,)):
            term(x.lhs)
            term(x.rhs)
        elif isinstance(x, (Rel, RelVar)):
            for a in x.args:
                term(a)
        elif isinstance(x, (And, Or, Implies)):
            walk(x.left)
            walk(x.right)
        elif isinstance(x, (ForAll, Exists)):
            out.add(x.var)
            walk(x.body)
        elif isinstance(x, ForAll2):
            walk(x.body)
        elif isinstance(x, Assign):
            out.update(x.targets)
            for t in x.terms:
                term(t)
        elif isinstance(x, Test):
            walk(x.cond)
        elif isinstance(x, Seq):
            walk(x.first)
            walk(x.second)
        elif isinstance(x, Union):
            walk(x.left)
            walk(x.right)
        elif isinstance(x, Star):
            walk(x.body)
        elif isinstance(x, Pca):
            walk(x.pre)
            walk(x.prog)
            walk(x.post)
        elif isinstance(x, Predicate):
            out.update(x.params)
            walk(x.body)
        elif isinstance(x, Sequent):
            for f in x.formulas():
                walk(f)
    walk(e)
    return out


def all_relvar_names(e) -> set:
    out: set = set()

    def walk(x):
        if isinstance(x, RelVar):
            out.add(x.name)
        elif isinstance(x, (And, Or, Implies)):
            walk(x.left)
            walk(x.right)
        elif isinstance(x, (ForAll, Exists)):
            walk(x.body)
        elif isinstance(x, ForAll2):
            out.add(x.rel)
            walk(x.body)
    walk(e)
    return out


class Namer:
    """Deterministic supply of names ``prefix1, prefix2, ...`` avoiding a given set."""

    def __init__(self, avoid=()):
        self.used = set(avoid)
        self.counters: dict = {}

    def name(self, prefix: str) -> str:
        i = self.counters.get(prefix, 0)
        while True:
            i += 1
            cand = f"{prefix}{i}"
            if cand not in self.used:
                break
        self.counters[prefix] = i
        self.used.add(cand)
        return cand

    def vector(self, prefix: str, n: int) -> list:
        return [self.name(prefix) for _ in range(n)]


# --------------------------------------------------------------------------
# M_alpha and Cl_beta

@dataclass(frozen=True)
class TranslationResult:
    formula: object
    frame: tuple
    outputs: tuple
    auxiliary: tuple


def _rename(frame, names):
    return {x: Var(n) for x, n in zip(frame, names) if x != n}


def _m(prog, frame, xs, ys, namer, minted):
    k = len(frame)
    if isinstance(prog, Assign):
        sub = _rename(frame, xs)
        assigned = dict(zip(prog.targets, prog.terms))
        parts = []
        for j, x in enumerate(frame):
            rhs = substitute_terms(assigned[x], sub) if x in assigned else Var(xs[j])
            parts.append(Eq(Var(ys[j]), rhs))
        return conj(parts)
    if isinstance(prog, Test):
        cond = substitute_terms(prog.cond, _rename(frame, xs))
        return And(cond, conj(Eq(Var(ys[j]), Var(xs[j])) for j in range(k)))
    if isinstance(prog, Seq):
        zs = namer.vector("z", k)
        minted.extend(zs)
        left = _m(prog.first, frame, xs, zs, namer, minted)
        right = _m(prog.second, frame, zs, ys, namer, minted)
        return exists_many(zs, And(left, right))
    if isinstance(prog, Union):
        return Or(_m(prog.left, frame, xs, ys, namer, minted),
                  _m(prog.right, frame, xs, ys, namer, minted))
    if isinstance(prog, Star):
        if k == 0:
            raise TranslationError("iteration needs a non-empty frame")
        rel = namer.name("R")
        cl = _closure(prog.body, rel, frame, namer, minted)
        return ForAll2(rel, k, Implies(And(cl, RelVar(rel, k, tuple(map(Var, xs)))),
                                       RelVar(rel, k, tuple(map(Var, ys)))))
    raise TypeError(f"not a program: {prog!r}")


def _closure(body, rel, frame, namer, minted):
    k = len(frame)
    us = namer.vector("u", k)
    vs = namer.vector("v", k)
    minted.extend(us + vs)
    inner = _m(body, frame, us, vs, namer, minted)
    return forall_many(us + vs, Implies(And(RelVar(rel, k, tuple(map(Var, us))), inner),
                                        RelVar(rel, k, tuple(map(Var, vs)))))


def _check_frame(prog, frame):
    if len(set(frame)) != len(frame):
        raise TranslationError("frame has repeated variables")
    missing = free_vars(prog) - set(frame)
    if missing:
        raise TranslationError(f"frame does not cover {sorted(missing)}")


def translate_program(prog, frame=None, inputs=None, outputs=None, avoid=()) -> TranslationResult:
    """M_alpha over ``frame``; ``inputs``/``outputs`` default to the frame and a fresh y-vector."""
    frame = tuple(program_vars(prog) if frame is None else frame)
    _check_frame(prog, frame)
    xs = list(frame if inputs is None else inputs)
    namer = Namer(set(avoid) | all_names(prog) | set(frame) | set(xs) | set(outputs or ()))
    ys = list(namer.vector("y", len(frame)) if outputs is None else outputs)
    if len(xs) != len(frame) or len(ys) != len(frame):
        raise TranslationError("input/output vectors must match the frame")
    minted: list = []
    formula = _m(prog, frame, xs, ys, namer, minted)
    return TranslationResult(formula, frame, tuple(ys), tuple(minted))


def closure_formula(body, rel: str, frame=None, avoid=()):
    """Cl_beta[R]: R is closed under one step of ``body``."""
    frame = tuple(program_vars(body) if frame is None else frame)
    _check_frame(body, frame)
    namer = Namer(set(avoid) | all_names(body) | set(frame))
    return _closure(body, rel, frame, namer, [])


@dataclass(frozen=True)
class PcaTranslation:
    formula: object
    frame: tuple
    outputs: tuple
    side: tuple
    matrix: object       # M_alpha[x, v]


def pca_parts(pca: Pca) -> PcaTranslation:
    frame = tuple(program_vars(pca.prog))
    side_set = (free_vars(pca.pre) | free_vars(pca.post)) - set(frame)
    side = tuple(sorted(side_set))
    namer = Namer(all_names(pca))
    vs = namer.vector("v", len(frame))
    minted: list = []
    matrix = _m(pca.prog, frame, list(frame), vs, namer, minted)
    post = substitute_terms(pca.post, _rename(frame, vs))
    body = Implies(And(pca.pre, matrix), post)
    return PcaTranslation(forall_many(list(frame) + vs + list(side), body),
                          frame, tuple(vs), side, matrix)


def translate_pca(pca: Pca):
    """The pca as one closed second-order formula."""
    return pca_parts(pca).formula


# --------------------------------------------------------------------------
# Xi-expansion

@dataclass(frozen=True)
class XiEntry:
    pred: Predicate
    side: tuple = ()       # side variables closed in the expansion

    @property
    def arity(self) -> int:
        return self.pred.arity


def make_xi(entries) -> tuple:
    out = []
    for e in entries:
        if isinstance(e, Predicate):
            e = XiEntry(e, ())
        if not _first_order(e.pred.body):
            raise TranslationError("Xi predicates must be first-order")
        out.append(e)
    if len({e.arity for e in out}) > 1:
        raise TranslationError("Xi predicates must share one arity")
    return tuple(out)


def _first_order(p):
    from .syntax import is_first_order
    return is_first_order(p)


def instantiate_entry(body, rel, entry: XiEntry):
    """``forall side. body[pred/rel]`` with the side variables renamed away from ``body``."""
    e = rename_entry(body, entry)
    return forall_many(e.side, substitute_predicate(body, rel, e.pred))


def rename_entry(body, entry: XiEntry) -> XiEntry:
    """``entry`` with side variables primed where they clash with names of ``body``."""
    pred, side = entry.pred, list(entry.side)
    clash = (free_vars(body) | all_names(body)) & set(side)
    if clash:
        namer_avoid = all_names(body) | all_names(pred) | set(side)
        ren = {}
        for s in side:
            if s in clash:
                new = s
                while new in namer_avoid:
                    new += "'"
                namer_avoid.add(new)
                ren[s] = new
        pred = Predicate(pred.params, substitute_terms(pred.body, {s: Var(n) for s, n in ren.items()}))
        side = [ren.get(s, s) for s in side]
    return XiEntry(pred, tuple(side))


def expand_formula(p, xi):
    """Replace every relational quantifier, innermost first, by its Xi-instances."""
    xi = make_xi(xi)
    return _expand(p, xi)


def _expand(p, xi):
    if isinstance(p, (And, Or, Implies)):
        return type(p)(_expand(p.left, xi), _expand(p.right, xi))
    if isinstance(p, (ForAll, Exists)):
        return type(p)(p.var, _expand(p.body, xi))
    if isinstance(p, ForAll2):
        body = _expand(p.body, xi)
        if not xi:
            warnings.warn("expanding a relational quantifier with empty Xi gives true", stacklevel=3)
        for e in xi:
            if e.arity != p.arity:
                raise TranslationError(f"Xi arity {e.arity} does not match {p.rel}:{p.arity}")
        return conj(instantiate_entry(body, p.rel, e) for e in xi)
    return p


def expand_sequent(s: Sequent, xi) -> Sequent:
    if not is_negative_sequent(s):
        raise TranslationError("only negative sequents can be expanded")
    xi = make_xi(xi)
    return Sequent(tuple(_expand(f, xi) for f in s.ante), tuple(_expand(f, xi) for f in s.succ))
