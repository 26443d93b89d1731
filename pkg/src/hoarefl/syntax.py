"""Terms, formulas, programs, pca's and sequents.

All nodes are immutable.  Negation is not a node of its own: ``Not(p)``
builds ``Implies(p, FALSE)`` so that polarity analysis has a single rule
for implication.
"""
from __future__ import annotations

from dataclasses import dataclass
from functools import lru_cache
import typing
from typing import Iterable, Mapping


def _node(cls):
    """Frozen dataclass whose hash is computed once and cached."""
    cls = dataclass(frozen=True)(cls)
    plain_hash = cls.__hash__

    def __hash__(self):
        try:
            return self.__dict__["_h"]
        except KeyError:
            h = plain_hash(self)
            object.__setattr__(self, "_h", h)
            return h

    cls.__hash__ = __hash__
    return cls


# --------------------------------------------------------------------------
# terms

@_node
class Var:
    name: str


@_node
class App:
    fn: str
    args: tuple = ()


Term = typing.Union[Var, App]


# --------------------------------------------------------------------------
# formulas

@_node
class Eq:
    lhs: Term
    rhs: Term


@_node
class Rel:
    name: str
    args: tuple = ()


@_node
class RelVar:
    name: str
    arity: int
    args: tuple

    def __post_init__(self):
        if self.arity < 1 or self.arity != len(self.args):
            raise ValueError(f"relational variable {self.name} needs arity >= 1 matching its arguments")


@_node
class Top:
    pass


@_node
class Bot:
    pass


TRUE = Top()
FALSE = Bot()


@_node
class And:
    left: "Formula"
    right: "Formula"


@_node
class Or:
    left: "Formula"
    right: "Formula"


@_node
class Implies:
    left: "Formula"
    right: "Formula"


@_node
class ForAll:
    var: str
    body: "Formula"


@_node
class Exists:
    var: str
    body: "Formula"


@_node
class ForAll2:
    rel: str
    arity: int
    body: "Formula"

    def __post_init__(self):
        if self.arity < 1:
            raise ValueError("relational variables need arity >= 1")


Formula = typing.Union[Eq, Rel, RelVar, Top, Bot, And, Or, Implies, ForAll, Exists, ForAll2]
ATOMS = (Eq, Rel, RelVar, Top, Bot)
BINARY = (And, Or, Implies)
QUANT = (ForAll, Exists)


def Not(p: Formula) -> Formula:
    return Implies(p, FALSE)


def is_negation(p) -> bool:
    return isinstance(p, Implies) and p.right == FALSE


def conj(parts: Iterable[Formula]) -> Formula:
    """Right-nested conjunction; the empty conjunction is ``true``."""
    parts = list(parts)
    if not parts:
        return TRUE
    out = parts[-1]
    for p in reversed(parts[:-1]):
        out = And(p, out)
    return out


def disj(parts: Iterable[Formula]) -> Formula:
    parts = list(parts)
    if not parts:
        return FALSE
    out = parts[-1]
    for p in reversed(parts[:-1]):
        out = Or(p, out)
    return out


def forall_many(names: Iterable[str], body: Formula) -> Formula:
    for n in reversed(list(names)):
        body = ForAll(n, body)
    return body


def exists_many(names: Iterable[str], body: Formula) -> Formula:
    for n in reversed(list(names)):
        body = Exists(n, body)
    return body


def conjuncts(p: Formula) -> list:
    """Inverse of :func:`conj` on right-nested chains."""
    out = []
    while isinstance(p, And):
        out.append(p.left)
        p = p.right
    out.append(p)
    return out


@_node
class Predicate:
    """``\\u1 ... uk. body``; variables of body other than params are side-variables."""
    params: tuple
    body: Formula

    def __post_init__(self):
        if not self.params:
            raise ValueError("predicates need at least one parameter")
        if len(set(self.params)) != len(self.params):
            raise ValueError("predicate parameters must be distinct")

    @property
    def arity(self) -> int:
        return len(self.params)

    def side_vars(self) -> list:
        return sorted(free_vars(self.body) - set(self.params))

    def apply(self, args) -> Formula:
        if len(args) != len(self.params):
            raise ValueError(f"predicate of arity {self.arity} applied to {len(args)} arguments")
        return substitute_terms(self.body, dict(zip(self.params, args)))


# --------------------------------------------------------------------------
# programs

@_node
class Assign:
    targets: tuple
    terms: tuple

    def __post_init__(self):
        if not self.targets or len(self.targets) != len(self.terms):
            raise ValueError("assignment needs as many terms as targets")
        if len(set(self.targets)) != len(self.targets):
            raise ValueError("assignment targets must be distinct")


@_node
class Test:
    cond: Formula

    def __post_init__(self):
        if not is_first_order(self.cond):
            raise ValueError("test formulas must be first-order")


@_node
class Seq:
    first: "Program"
    second: "Program"


@_node
class Union:
    left: "Program"
    right: "Program"


@_node
class Star:
    body: "Program"


Program = typing.Union[Assign, Test, Seq, Union, Star]


def program_size(p: Program) -> int:
    if isinstance(p, (Assign, Test)):
        return 1
    if isinstance(p, Star):
        return 1 + program_size(p.body)
    return 1 + program_size(p.first if isinstance(p, Seq) else p.left) + \
        program_size(p.second if isinstance(p, Seq) else p.right)


@_node
class Pca:
    pre: Formula
    prog: Program
    post: Formula

    def __post_init__(self):
        if not (is_first_order(self.pre) and is_first_order(self.post)):
            raise ValueError("pca conditions must be first-order")


@_node
class Sequent:
    """Antecedent and succedent, read as sets (contraction is implicit)."""
    ante: tuple = ()
    succ: tuple = ()

    @staticmethod
    def of(ante=(), succ=()) -> "Sequent":
        return Sequent(_dedupe(ante), _dedupe(succ))

    def formulas(self):
        return self.ante + self.succ


def _dedupe(fs) -> tuple:
    seen, out = set(), []
    for f in fs:
        k = alpha_key(f)
        if k not in seen:
            seen.add(k)
            out.append(f)
    return tuple(out)


@dataclass(frozen=True)
class Vocabulary:
    functions: tuple = ()   # (name, arity)
    relations: tuple = ()

    def __post_init__(self):
        names = [n for n, _ in self.functions] + [n for n, _ in self.relations]
        if len(names) != len(set(names)):
            raise ValueError("vocabulary names must be unique")

    def function_arity(self, name):
        return dict(self.functions).get(name)

    def relation_arity(self, name):
        return dict(self.relations).get(name)


# --------------------------------------------------------------------------
# free variables and symbols

def term_vars(t: Term) -> set:
    if isinstance(t, Var):
        return {t.name}
    out = set()
    for a in t.args:
        out |= term_vars(a)
    return out


@lru_cache(maxsize=200_000)
def _fv_formula(p) -> frozenset:
    if isinstance(p, Eq):
        return frozenset(term_vars(p.lhs) | term_vars(p.rhs))
    if isinstance(p, (Rel, RelVar)):
        out = set()
        for a in p.args:
            out |= term_vars(a)
        return frozenset(out)
    if isinstance(p, (Top, Bot)):
        return frozenset()
    if isinstance(p, BINARY):
        return _fv_formula(p.left) | _fv_formula(p.right)
    if isinstance(p, QUANT):
        return _fv_formula(p.body) - {p.var}
    if isinstance(p, ForAll2):
        return _fv_formula(p.body)
    raise TypeError(f"not a formula: {p!r}")


def free_vars(e) -> set:
    """Free first-order variables of a term, formula, program, pca, predicate or sequent."""
    if isinstance(e, (Var, App)):
        return term_vars(e)
    if isinstance(e, Assign):
        out = set(e.targets)
        for t in e.terms:
            out |= term_vars(t)
        return out
    if isinstance(e, Test):
        return set(_fv_formula(e.cond))
    if isinstance(e, Seq):
        return free_vars(e.first) | free_vars(e.second)
    if isinstance(e, Union):
        return free_vars(e.left) | free_vars(e.right)
    if isinstance(e, Star):
        return free_vars(e.body)
    if isinstance(e, Pca):
        return free_vars(e.pre) | free_vars(e.prog) | free_vars(e.post)
    if isinstance(e, Predicate):
        return set(_fv_formula(e.body)) - set(e.params)
    if isinstance(e, Sequent):
        out = set()
        for f in e.formulas():
            out |= _fv_formula(f)
        return out
    return set(_fv_formula(e))


@lru_cache(maxsize=100_000)
def _frv(p) -> frozenset:
    if isinstance(p, RelVar):
        return frozenset({p.name})
    if isinstance(p, BINARY):
        return _frv(p.left) | _frv(p.right)
    if isinstance(p, QUANT):
        return _frv(p.body)
    if isinstance(p, ForAll2):
        return _frv(p.body) - {p.rel}
    return frozenset()


def free_relvars(e) -> set:
    if isinstance(e, Sequent):
        out = set()
        for f in e.formulas():
            out |= _frv(f)
        return out
    if isinstance(e, Predicate):
        return set(_frv(e.body))
    return set(_frv(e))


def program_vars(p: Program) -> list:
    """Variables of a program in order of first occurrence in its text."""
    out: list = []

    def add(names):
        for n in names:
            if n not in out:
                out.append(n)

    def term_order(t):
        if isinstance(t, Var):
            yield t.name
        else:
            for a in t.args:
                yield from term_order(a)

    def formula_order(f, bound=()):
        if isinstance(f, Eq):
            for t in (f.lhs, f.rhs):
                yield from (n for n in term_order(t) if n not in bound)
        elif isinstance(f, (Rel, RelVar)):
            for t in f.args:
                yield from (n for n in term_order(t) if n not in bound)
        elif isinstance(f, BINARY):
            yield from formula_order(f.left, bound)
            yield from formula_order(f.right, bound)
        elif isinstance(f, QUANT):
            yield from formula_order(f.body, bound + (f.var,))
        elif isinstance(f, ForAll2):
            yield from formula_order(f.body, bound)

    def walk(q):
        if isinstance(q, Assign):
            for x, t in zip(q.targets, q.terms):
                add([x])
                add(term_order(t))
        elif isinstance(q, Test):
            add(formula_order(q.cond))
        elif isinstance(q, Seq):
            walk(q.first)
            walk(q.second)
        elif isinstance(q, Union):
            walk(q.left)
            walk(q.right)
        else:
            walk(q.body)

    walk(p)
    return out


def is_first_order(p: Formula) -> bool:
    if isinstance(p, (ForAll2, RelVar)):
        return False
    if isinstance(p, BINARY):
        return is_first_order(p.left) and is_first_order(p.right)
    if isinstance(p, QUANT):
        return is_first_order(p.body)
    return True


def term_symbols(t: Term) -> set:
    """Function symbols (with arity) of a term."""
    if isinstance(t, Var):
        return set()
    out = {(t.fn, len(t.args))}
    for a in t.args:
        out |= term_symbols(a)
    return out


@lru_cache(maxsize=100_000)
def symbols(p) -> frozenset:
    """Non-logical symbols of a formula: ('f', name, arity) and ('r', name, arity)."""
    if isinstance(p, Eq):
        return frozenset(("f",) + s for s in term_symbols(p.lhs) | term_symbols(p.rhs))
    if isinstance(p, Rel):
        out = {("r", p.name, len(p.args))}
        for a in p.args:
            out |= {("f",) + s for s in term_symbols(a)}
        return frozenset(out)
    if isinstance(p, RelVar):
        out = set()
        for a in p.args:
            out |= {("f",) + s for s in term_symbols(a)}
        return frozenset(out)
    if isinstance(p, BINARY):
        return symbols(p.left) | symbols(p.right)
    if isinstance(p, (QUANT, ForAll2)):
        return symbols(p.body)
    return frozenset()


def subterms(e) -> set:
    """All term occurrences (as values) inside a term or formula, including bound-variable terms."""
    out: set = set()

    def t_walk(t):
        out.add(t)
        if isinstance(t, App):
            for a in t.args:
                t_walk(a)

    def f_walk(f):
        if isinstance(f, Eq):
            t_walk(f.lhs)
            t_walk(f.rhs)
        elif isinstance(f, (Rel, RelVar)):
            for a in f.args:
                t_walk(a)
        elif isinstance(f, BINARY):
            f_walk(f.left)
            f_walk(f.right)
        elif isinstance(f, (QUANT, ForAll2)):
            f_walk(f.body)

    if isinstance(e, (Var, App)):
        t_walk(e)
    else:
        f_walk(e)
    return out


def term_depth(t: Term) -> int:
    if isinstance(t, Var) or not t.args:
        return 0
    return 1 + max(term_depth(a) for a in t.args)


# --------------------------------------------------------------------------
# fresh names and substitution

def fresh(base: str, avoid) -> str:
    """``base`` itself if unused, otherwise ``base`` with enough primes appended."""
    name = base
    while name in avoid:
        name += "'"
    return name


def fresh_vector(prefix: str, n: int, avoid) -> list:
    """``n`` distinct names ``prefix1 .. prefixn``, primed where they clash with ``avoid``."""
    avoid = set(avoid)
    out = []
    for i in range(1, n + 1):
        name = fresh(f"{prefix}{i}", avoid)
        avoid.add(name)
        out.append(name)
    return out


def subst_term(t: Term, m: Mapping[str, Term]) -> Term:
    if isinstance(t, Var):
        return m.get(t.name, t)
    if not t.args:
        return t
    return App(t.fn, tuple(subst_term(a, m) for a in t.args))


def substitute_terms(e, m: Mapping[str, Term]):
    """Simultaneous capture-avoiding substitution of terms for free variables."""
    if isinstance(e, (Var, App)):
        return subst_term(e, m)
    if not m:
        return e
    fv = _fv_formula(e)
    m = {k: v for k, v in m.items() if k in fv and v != Var(k)}
    if not m:
        return e
    return _subst(e, m)


def _subst(p, m):
    if isinstance(p, Eq):
        return Eq(subst_term(p.lhs, m), subst_term(p.rhs, m))
    if isinstance(p, Rel):
        return Rel(p.name, tuple(subst_term(a, m) for a in p.args))
    if isinstance(p, RelVar):
        return RelVar(p.name, p.arity, tuple(subst_term(a, m) for a in p.args))
    if isinstance(p, (Top, Bot)):
        return p
    if isinstance(p, BINARY):
        return type(p)(substitute_terms(p.left, m), substitute_terms(p.right, m))
    if isinstance(p, QUANT):
        inner = {k: v for k, v in m.items() if k != p.var}
        if not inner:
            return p
        incoming = set()
        for k, v in inner.items():
            if k in _fv_formula(p.body):
                incoming |= term_vars(v)
        if p.var in incoming:
            new = fresh(p.var, incoming | _fv_formula(p.body) | set(inner))
            inner = dict(inner)
            inner[p.var] = Var(new)
            return type(p)(new, substitute_terms(p.body, inner))
        return type(p)(p.var, substitute_terms(p.body, inner))
    if isinstance(p, ForAll2):
        return ForAll2(p.rel, p.arity, substitute_terms(p.body, m))
    raise TypeError(f"not a formula: {p!r}")


def rename_relvar(p: Formula, old: str, new: str) -> Formula:
    """Rename free occurrences of a relational variable (``new`` must be fresh)."""
    if isinstance(p, RelVar):
        return RelVar(new, p.arity, p.args) if p.name == old else p
    if isinstance(p, BINARY):
        return type(p)(rename_relvar(p.left, old, new), rename_relvar(p.right, old, new))
    if isinstance(p, QUANT):
        return type(p)(p.var, rename_relvar(p.body, old, new))
    if isinstance(p, ForAll2):
        if p.rel == old:
            return p
        return ForAll2(p.rel, p.arity, rename_relvar(p.body, old, new))
    return p


def substitute_predicate(p: Formula, rel: str, pred: Predicate) -> Formula:
    """Replace every free atom ``rel(t..)`` by the predicate body instantiated at ``t..``.

    Binders of ``p`` that would capture a side-variable (or a free relational
    variable) of the predicate are renamed.
    """
    side = free_vars(pred)
    side_rel = free_relvars(pred)

    def go(q):
        if isinstance(q, RelVar):
            if q.name != rel:
                return q
            if q.arity != pred.arity:
                raise ValueError(f"arity mismatch substituting {pred.arity}-ary predicate for {rel}:{q.arity}")
            return pred.apply(q.args)
        if isinstance(q, (Eq, Rel, Top, Bot)):
            return q
        if rel not in _frv(q):
            return q
        if isinstance(q, BINARY):
            return type(q)(go(q.left), go(q.right))
        if isinstance(q, QUANT):
            if q.var in side:
                new = fresh(q.var, side | _fv_formula(q.body))
                body = substitute_terms(q.body, {q.var: Var(new)})
                return type(q)(new, go(body))
            return type(q)(q.var, go(q.body))
        if isinstance(q, ForAll2):
            if q.rel == rel:
                return q
            if q.rel in side_rel:
                new = fresh(q.rel, side_rel | _frv(q.body) | {rel})
                return ForAll2(new, q.arity, go(rename_relvar(q.body, q.rel, new)))
            return ForAll2(q.rel, q.arity, go(q.body))
        raise TypeError(f"not a formula: {q!r}")

    return go(p)


def replace_term(e, old: Term, new: Term):
    """Replace every occurrence of the term ``old`` (free occurrences only) by ``new``."""
    if isinstance(e, (Var, App)):
        if e == old:
            return new
        if isinstance(e, App) and e.args:
            return App(e.fn, tuple(replace_term(a, old, new) for a in e.args))
        return e
    p = e
    if isinstance(p, Eq):
        return Eq(replace_term(p.lhs, old, new), replace_term(p.rhs, old, new))
    if isinstance(p, Rel):
        return Rel(p.name, tuple(replace_term(a, old, new) for a in p.args))
    if isinstance(p, RelVar):
        return RelVar(p.name, p.arity, tuple(replace_term(a, old, new) for a in p.args))
    if isinstance(p, (Top, Bot)):
        return p
    if isinstance(p, BINARY):
        return type(p)(replace_term(p.left, old, new), replace_term(p.right, old, new))
    if isinstance(p, QUANT):
        if p.var in term_vars(old):
            return p
        if p.var in term_vars(new):
            v = fresh(p.var, term_vars(new) | _fv_formula(p.body) | term_vars(old))
            body = substitute_terms(p.body, {p.var: Var(v)})
            return type(p)(v, replace_term(body, old, new))
        return type(p)(p.var, replace_term(p.body, old, new))
    if isinstance(p, ForAll2):
        return ForAll2(p.rel, p.arity, replace_term(p.body, old, new))
    raise TypeError(f"not a formula: {p!r}")


# --------------------------------------------------------------------------
# alpha-equivalence

@lru_cache(maxsize=400_000)
def alpha_key(p):
    """Hashable key identifying ``p`` up to renaming of bound (relational) variables."""
    return _key(p, (), ())


def _tkey(t, env):
    if isinstance(t, Var):
        for i in range(len(env) - 1, -1, -1):
            if env[i] == t.name:
                return ("b", len(env) - 1 - i)
        return ("v", t.name)
    return ("a", t.fn) + tuple(_tkey(a, env) for a in t.args)


def _key(p, env, renv):
    if isinstance(p, Eq):
        return ("=", _tkey(p.lhs, env), _tkey(p.rhs, env))
    if isinstance(p, Rel):
        return ("R", p.name) + tuple(_tkey(a, env) for a in p.args)
    if isinstance(p, RelVar):
        for i in range(len(renv) - 1, -1, -1):
            if renv[i] == p.name:
                name = ("b", len(renv) - 1 - i)
                break
        else:
            name = ("v", p.name)
        return ("X", name, p.arity) + tuple(_tkey(a, env) for a in p.args)
    if isinstance(p, Top):
        return ("T",)
    if isinstance(p, Bot):
        return ("F",)
    if isinstance(p, BINARY):
        if not env and not renv:
            return (type(p).__name__, alpha_key(p.left), alpha_key(p.right))
        return (type(p).__name__, _key(p.left, env, renv), _key(p.right, env, renv))
    if isinstance(p, QUANT):
        return (type(p).__name__, _key(p.body, env + (p.var,), renv))
    if isinstance(p, ForAll2):
        return ("A2", p.arity, _key(p.body, env, renv + (p.rel,)))
    raise TypeError(f"not a formula: {p!r}")


def alpha_eq(a, b) -> bool:
    return a == b or alpha_key(a) == alpha_key(b)


def predicate_key(pred: Predicate):
    return alpha_key(forall_many(pred.params, pred.body)) + (pred.arity,)


# --------------------------------------------------------------------------
# polarity of relational quantifiers

POSITIVE_ONLY = "positive-only"
NEGATIVE_ONLY = "negative-only"
MIXED = "mixed"
NONE = "none"


def forall2_occurrences(p: Formula, negative: bool = False):
    """Yield (occurrence, is_negative) for every relational quantifier in ``p``."""
    if isinstance(p, Implies):
        yield from forall2_occurrences(p.left, not negative)
        yield from forall2_occurrences(p.right, negative)
    elif isinstance(p, (And, Or)):
        yield from forall2_occurrences(p.left, negative)
        yield from forall2_occurrences(p.right, negative)
    elif isinstance(p, QUANT):
        yield from forall2_occurrences(p.body, negative)
    elif isinstance(p, ForAll2):
        yield p, negative
        yield from forall2_occurrences(p.body, negative)


def forall2_polarity(p: Formula) -> str:
    signs = {neg for _, neg in forall2_occurrences(p)}
    if not signs:
        return NONE
    if signs == {False}:
        return POSITIVE_ONLY
    if signs == {True}:
        return NEGATIVE_ONLY
    return MIXED


def is_forall2_positive(p: Formula) -> bool:
    return forall2_polarity(p) in (POSITIVE_ONLY, NONE)


def is_forall2_negative(p: Formula) -> bool:
    return forall2_polarity(p) in (NEGATIVE_ONLY, NONE)


def is_negative_sequent(s: Sequent) -> bool:
    """Every relational quantifier sits where only the antecedent rule can reach it.

    That is: antecedent formulas carry only positive occurrences and succedent
    formulas only negative ones, so no succedent rule for ``forall2`` can fire.
    """
    return all(is_forall2_positive(f) for f in s.ante) and \
        all(is_forall2_negative(f) for f in s.succ)
