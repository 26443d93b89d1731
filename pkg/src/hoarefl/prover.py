"""Bounded, deterministic proof search producing checkable cut-free derivations.

Classical search applies the invertible rules eagerly, prefers branching
steps where all but one premise closes at once, and otherwise splits.
Quantifier instances come from matching the quantified body against the
atoms and terms of the branch; ``depth`` bounds the number of
instantiation rounds (and, intuitionistically, of non-invertible choices).
Atoms are closed modulo equality by congruence closure over the
antecedent equations; each closure is emitted as a chain of ``repl-r`` steps.
"""
from __future__ import annotations

import itertools
from functools import lru_cache

from .sequent import CLASSICAL, INTUITIONISTIC, Deriv, as_theory
from .syntax import (
    And, App, Bot, Eq, Exists, ForAll, Implies, Or, Predicate, Rel, RelVar, Sequent, Top,
    Var, alpha_key, is_first_order, substitute_terms, term_depth, term_vars,
)
from .text import print_term
from .translate import all_names

BLOCK_INSTANCE_LIMIT = 24
STEP_LIMIT = 60_000


class _OutOfSteps(Exception):
    pass


# --------------------------------------------------------------------------
# sequent helpers

def _plus(s: Sequent, ante=(), succ=()) -> Sequent:
    return Sequent.of(s.ante + tuple(ante), s.succ + tuple(succ))


def _skey(s: Sequent):
    return (frozenset(alpha_key(f) for f in s.ante), frozenset(alpha_key(f) for f in s.succ))


def _is_atom(f) -> bool:
    return isinstance(f, (Eq, Rel, RelVar))


class _Names:
    """Eigenvariable supply: ``w1, w2, ...`` avoiding every name seen so far."""

    def __init__(self, avoid):
        self.used = set(avoid)
        self.i = 0

    def fresh(self) -> str:
        while True:
            self.i += 1
            n = f"w{self.i}"
            if n not in self.used:
                self.used.add(n)
                return n


# --------------------------------------------------------------------------
# closure modulo equality

def _args(atom):
    return (atom.lhs, atom.rhs) if isinstance(atom, Eq) else atom.args


def _rebuild(atom, args):
    if isinstance(atom, Eq):
        return Eq(args[0], args[1])
    if isinstance(atom, Rel):
        return Rel(atom.name, tuple(args))
    return RelVar(atom.name, atom.arity, tuple(args))


def _term_positions(t, s, path=()):
    if t == s:
        yield path
    if isinstance(t, App):
        for i, a in enumerate(t.args):
            yield from _term_positions(a, s, path + (i,))


def _replace_at_term(t, path, new):
    if not path:
        return new
    args = list(t.args)
    args[path[0]] = _replace_at_term(args[path[0]], path[1:], new)
    return App(t.fn, tuple(args))


def _atom_positions(atom, s):
    for i, a in enumerate(_args(atom)):
        for p in _term_positions(a, s):
            yield (i,) + p


def _replace_at(atom, path, new):
    args = list(_args(atom))
    args[path[0]] = _replace_at_term(args[path[0]], path[1:], new)
    return _rebuild(atom, args)


def _atom_vars(atom):
    out = set()
    for a in _args(atom):
        out |= term_vars(a)
    return out


def _hole(avoid) -> str:
    name = "h"
    while name in avoid:
        name += "'"
    return name


def repl_step(ante, fact, fact_proof, eq, eq_proof, path):
    """Proof of ``ante |- fact'`` where ``fact'`` rewrites ``fact`` at ``path`` by ``eq``."""
    s, t = eq.lhs, eq.rhs
    h = _hole(_atom_vars(fact) | term_vars(s) | term_vars(t))
    ctx = Predicate((h,), _replace_at(fact, path, Var(h)))
    new = ctx.apply((t,))
    d = Deriv("repl-r", Sequent(ante, (new,)), (eq_proof, fact_proof), principal=new,
              pred=ctx, lhs=s, rhs=t)
    return new, d


def symmetry(ante, eq, eq_proof):
    """Proof of ``ante |- t = s`` from a proof of ``ante |- s = t``."""
    s, t = eq.lhs, eq.rhs
    h = _hole(term_vars(s) | term_vars(t))
    ctx = Predicate((h,), Eq(Var(h), s))
    refl = Deriv("refl", Sequent(ante, (Eq(s, s),)), principal=Eq(s, s))
    new = Eq(t, s)
    return new, Deriv("repl-r", Sequent(ante, (new,)), (eq_proof, refl), principal=new,
                      pred=ctx, lhs=s, rhs=t)


class _Congruence:
    """Ground congruence closure over the terms of a sequent, with explanations.

    Merges are recorded in a proof forest whose edges are justified either by
    an antecedent equation or by congruence of two applications; a path in
    the forest is turned into a chain of ``repl-r`` steps.
    """

    def __init__(self, ante, terms):
        self.ante = ante
        self.parent = {}
        self.edge = {}          # proof forest: node -> (neighbour, justification)
        self.terms = []
        for t in terms:
            self._add(t)

    def _add(self, t):
        if t in self.parent:
            return
        if isinstance(t, App):
            for a in t.args:
                self._add(a)
        self.parent[t] = t
        self.terms.append(t)

    def find(self, t):
        while self.parent[t] != t:
            self.parent[t] = self.parent[self.parent[t]]
            t = self.parent[t]
        return t

    def _reroot(self, t):
        prev, just = None, None
        cur = t
        while cur is not None:
            nxt = self.edge.get(cur)
            if prev is None:
                self.edge.pop(cur, None)
            else:
                self.edge[cur] = (prev, just)
            if nxt is None:
                break
            prev, just, cur = cur, nxt[1], nxt[0]

    def merge(self, a, b, just):
        ra, rb = self.find(a), self.find(b)
        if ra == rb:
            return False
        self._reroot(a)
        self.edge[a] = (b, just)
        self.parent[ra] = rb
        return True

    def saturate(self, equations):
        for eq in equations:
            self.merge(eq.lhs, eq.rhs, ("eq", eq))
        apps = [t for t in self.terms if isinstance(t, App) and t.args]
        changed = True
        while changed:
            changed = False
            sig = {}
            for t in apps:
                key = (t.fn, tuple(self.find(a) for a in t.args))
                other = sig.get(key)
                if other is None:
                    sig[key] = t
                elif self.find(other) != self.find(t):
                    self.merge(t, other, ("cong", t, other))
                    changed = True

    def _path(self, a):
        out = [a]
        while a in self.edge:
            a = self.edge[a][0]
            out.append(a)
        return out

    def _steps(self, a, b):
        """Forest edges from ``a`` to ``b`` as (from, to, justification)."""
        pa, pb = self._path(a), self._path(b)
        common = set(pb)
        meet = next(t for t in pa if t in common)
        steps = []
        for t in pa[:pa.index(meet)]:
            nxt, just = self.edge[t]
            steps.append((t, nxt, just))
        back = []
        for t in pb[:pb.index(meet)]:
            nxt, just = self.edge[t]
            back.append((nxt, t, just))
        return steps + list(reversed(back))

    def _refl(self, t):
        e = Eq(t, t)
        return Deriv("refl", Sequent(self.ante, (e,)), principal=e)

    def _edge_proof(self, s, t, just):
        if just[0] == "eq":
            eq = just[1]
            ax = Deriv("axiom", Sequent(self.ante, (eq,)), principal=eq)
            if (eq.lhs, eq.rhs) == (s, t):
                return ax
            return symmetry(self.ante, eq, ax)[1]
        # congruence: rewrite the arguments of s into those of t, inside  s = s
        proof = self._refl(s)
        cur = Eq(s, s)
        for i, (x, y) in enumerate(zip(s.args, t.args)):
            if x == y:
                continue
            eq_proof = self.prove_eq(x, y)
            path = (1, i)
            cur, proof = repl_step(self.ante, cur, proof, Eq(x, y), eq_proof, path)
        return proof

    def prove_eq(self, a, b):
        """Proof of ``ante |- a = b``; requires ``a`` and ``b`` to be congruent."""
        if a == b:
            return self._refl(a)
        proof = self._refl(a)
        cur = Eq(a, a)
        for s, t, just in self._steps(a, b):
            ep = self._edge_proof(s, t, just)
            cur, proof = repl_step(self.ante, cur, proof, Eq(s, t), ep, (1,))
        return proof

    def prove_atom(self, src, src_proof, goal):
        """Rewrite antecedent atom ``src`` argument by argument into ``goal``."""
        cur, proof = src, src_proof
        for i, (x, y) in enumerate(zip(_args(src), _args(goal))):
            if x != y:
                cur, proof = repl_step(self.ante, cur, proof, Eq(x, y), self.prove_eq(x, y), (i,))
        return proof


def _same_head(a, b) -> bool:
    if type(a) is not type(b):
        return False
    if isinstance(a, Rel):
        return a.name == b.name and len(a.args) == len(b.args)
    if isinstance(a, RelVar):
        return a.name == b.name and a.arity == b.arity
    return True


def _eq_closure(s: Sequent):
    """Close ``s`` by congruence: a succedent atom follows from antecedent atoms and equations."""
    goals = [f for f in s.succ if _is_atom(f)]
    if not goals:
        return None
    ante_atoms = [f for f in s.ante if _is_atom(f)]
    equations = [f for f in ante_atoms if isinstance(f, Eq) and f.lhs != f.rhs]
    if not equations:
        return None
    terms = []
    for f in ante_atoms + goals:
        terms.extend(_args(f))
    cc = _Congruence(s.ante, terms)
    cc.saturate(equations)
    for g in goals:
        if isinstance(g, Eq) and cc.find(g.lhs) == cc.find(g.rhs):
            return cc.prove_eq(g.lhs, g.rhs).reconclude(s)
        for f in ante_atoms:
            if isinstance(g, Eq) or not _same_head(f, g):
                continue
            if all(cc.find(x) == cc.find(y) for x, y in zip(_args(f), _args(g))):
                ax = Deriv("axiom", Sequent(s.ante, (f,)), principal=f)
                return cc.prove_atom(f, ax, g).reconclude(s)
    return None


@lru_cache(maxsize=20_000)
def close(s: Sequent):
    """A zero-search closing derivation of ``s``, or ``None``."""
    ante = {alpha_key(f) for f in s.ante}
    for f in s.ante:
        if isinstance(f, Bot):
            return Deriv("bot-l", s, principal=f)
    for f in s.succ:
        if isinstance(f, Top):
            return Deriv("top-r", s, principal=f)
        if isinstance(f, Eq) and f.lhs == f.rhs:
            return Deriv("refl", s, principal=f)
        if alpha_key(f) in ante:
            return Deriv("axiom", s, principal=f)
    return _eq_closure(s)


# --------------------------------------------------------------------------
# instantiation by matching

def _free_parts(formulas):
    """Atoms and terms of ``formulas`` that mention no bound variable."""
    atoms, terms = {}, {}

    def term(t, bound):
        if term_vars(t) & bound:
            if isinstance(t, App):
                for a in t.args:
                    term(a, bound)
            return
        if t not in terms:
            terms[t] = None
            if isinstance(t, App):
                for a in t.args:
                    term(a, bound)

    def walk(f, bound):
        if _is_atom(f):
            if not (_atom_vars(f) & bound):
                atoms.setdefault(alpha_key(f), f)
            for a in _args(f):
                term(a, bound)
        elif isinstance(f, (And, Or, Implies)):
            walk(f.left, bound)
            walk(f.right, bound)
        elif isinstance(f, (ForAll, Exists)):
            walk(f.body, bound | {f.var})

    for f in formulas:
        walk(f, frozenset())
    return list(atoms.values()), list(terms)


def _patterns(body, xs):
    """Atoms and compound subterms of ``body`` mentioning block variables ``xs``."""
    pats = []

    def term(t, bound):
        if isinstance(t, App) and t.args:
            tv = term_vars(t)
            if tv & xs and not tv & bound:
                pats.append(t)
            for a in t.args:
                term(a, bound)

    def walk(f, bound):
        if _is_atom(f):
            v = _atom_vars(f)
            if v & xs and not v & bound:
                pats.append(f)
            for a in _args(f):
                term(a, bound)
        elif isinstance(f, (And, Or, Implies)):
            walk(f.left, bound)
            walk(f.right, bound)
        elif isinstance(f, (ForAll, Exists)):
            walk(f.body, bound | {f.var})

    walk(body, frozenset())
    return pats


def _match_term(p, t, xs, sub):
    if isinstance(p, Var):
        if p.name in xs:
            got = sub.get(p.name)
            if got is None:
                sub = dict(sub)
                sub[p.name] = t
                return sub
            return sub if got == t else None
        return sub if p == t else None
    if not isinstance(t, App) or t.fn != p.fn or len(t.args) != len(p.args):
        return None
    for a, b in zip(p.args, t.args):
        sub = _match_term(a, b, xs, sub)
        if sub is None:
            return None
    return sub


def _match(p, target, xs):
    if _is_atom(p):
        if type(p) is not type(target):
            return None
        if isinstance(p, Rel) and p.name != target.name:
            return None
        if isinstance(p, RelVar) and (p.name != target.name or p.arity != target.arity):
            return None
        pa, ta = _args(p), _args(target)
        if len(pa) != len(ta):
            return None
        sub = {}
        for a, b in zip(pa, ta):
            sub = _match_term(a, b, xs, sub)
            if sub is None:
                return None
        return sub
    return _match_term(p, target, xs, {})


def _block(f):
    kind = type(f)
    xs, body = [], f
    while isinstance(body, kind) and body.var not in xs:
        xs.append(body.var)
        body = body.body
    return xs, body


def instances(f, formulas, limit=BLOCK_INSTANCE_LIMIT):
    """Candidate instantiations (tuples of terms) for the quantifier block of ``f``."""
    xs, body = _block(f)
    xset = frozenset(xs)
    atoms, terms = _free_parts(formulas)
    universe = sorted(terms, key=lambda t: (term_depth(t), print_term(t)))
    partial = [{}]
    seen = {frozenset()}
    for pat in _patterns(body, xset):
        targets = atoms if _is_atom(pat) else universe
        matches = []
        for tg in targets:
            m = _match(pat, tg, xset)
            if m is not None and m not in matches:
                matches.append(m)
        grown = []
        for p in partial:
            for m in matches:
                if all(p.get(k, v) == v for k, v in m.items()):
                    merged = {**p, **m}
                    key = frozenset(merged.items())
                    if key not in seen:
                        seen.add(key)
                        grown.append(merged)
        partial.extend(grown)
        if len(partial) > 400:
            partial = partial[:400]
    partial.sort(key=lambda p: -len(p))
    if not universe:
        universe = [Var("w0")]
    out, keys = [], set()
    for p in partial:
        missing = [x for x in xs if x not in p]
        fills = itertools.islice(itertools.product(universe, repeat=len(missing)), limit)
        for fill in fills:
            full = {**p, **dict(zip(missing, fill))}
            tup = tuple(full[x] for x in xs)
            if tup not in keys:
                keys.add(tup)
                out.append(tup)
                if len(out) >= limit:
                    return xs, out
    return xs, out


def _instance_chain(f, terms):
    """Intermediate and final formulas of instantiating the block of ``f`` with ``terms``."""
    cur, out = f, []
    for t in terms:
        cur = substitute_terms(cur.body, {cur.var: t})
        out.append(cur)
    return out


def _chain_left(s, f, terms):
    """``all-l`` chain from ``s`` adding the instance; ``rest`` proves the extended sequent."""
    chain = _instance_chain(f, terms)
    seqs, cur = [], s
    for g in chain:
        seqs.append(cur)
        cur = _plus(cur, ante=(g,))
    return cur, lambda d: _wrap_chain("all-l", f, terms, chain, seqs, d)


def _chain_right(s, f, terms):
    chain = _instance_chain(f, terms)
    seqs, cur = [], s
    for g in chain:
        seqs.append(cur)
        cur = _plus(cur, succ=(g,))
    return cur, lambda d: _wrap_chain("ex-r", f, terms, chain, seqs, d)


def _wrap_chain(rule, f, terms, chain, seqs, top):
    d = top
    principals = [f] + chain[:-1]
    for i in range(len(terms) - 1, -1, -1):
        d = Deriv(rule, seqs[i], (d,), principal=principals[i], term=terms[i])
    return d


# --------------------------------------------------------------------------
# shared search pieces

class _Search:
    def __init__(self, root: Sequent, theory):
        self.names = _Names(all_names(root) | set().union(*[all_names(t) for t in theory]))
        self.failed: set = set()
        self.steps = 0

    def tick(self):
        self.steps += 1
        if self.steps > STEP_LIMIT:
            raise _OutOfSteps()

    def eigen(self, s, f, side):
        y = self.names.fresh()
        inst = substitute_terms(f.body, {f.var: Var(y)})
        return y, (_plus(s, ante=(inst,)) if side == "l" else _plus(s, succ=(inst,)))


def _branching(f, side, s):
    """Rule name and premises for a propositional rule on ``f``, or ``None``."""
    if side == "l":
        if isinstance(f, And):
            return "and-l", [_plus(s, ante=(f.left, f.right))]
        if isinstance(f, Or):
            return "or-l", [_plus(s, ante=(f.left,)), _plus(s, ante=(f.right,))]
        if isinstance(f, Implies):
            return "imp-l", [_plus(s, succ=(f.left,)), _plus(s, ante=(f.right,))]
    else:
        if isinstance(f, And):
            return "and-r", [_plus(s, succ=(f.left,)), _plus(s, succ=(f.right,))]
        if isinstance(f, Or):
            return "or-r", [_plus(s, succ=(f.left, f.right))]
        if isinstance(f, Implies):
            return "imp-r", [_plus(s, ante=(f.left,), succ=(f.right,))]
    return None


def _useful(s, prems):
    k = _skey(s)
    return all(_skey(p) != k for p in prems)


# --------------------------------------------------------------------------
# classical search

def _classical(sr: _Search, s: Sequent, rounds: int, done: frozenset):
    sr.tick()
    d = close(s)
    if d is not None:
        return d
    key = (_skey(s), rounds, done)
    if key in sr.failed:
        return None
    out = _classical_step(sr, s, rounds, done)
    if out is None:
        sr.failed.add(key)
    return out


def _classical_step(sr, s, rounds, done):
    cands = [(f, "l") for f in s.ante] + [(f, "r") for f in s.succ]
    # invertible single-premise rules and eigenvariables
    for f, side in cands:
        if (side == "l" and isinstance(f, Exists)) or (side == "r" and isinstance(f, ForAll)):
            k = (side, alpha_key(f))
            if k in done:
                continue
            y, p = sr.eigen(s, f, side)
            sub = _classical(sr, p, rounds, done | {k})
            if sub is None:
                return None
            return Deriv("ex-l" if side == "l" else "all-r", s, (sub,), principal=f, eigen=y)
        b = _branching(f, side, s)
        if b and len(b[1]) == 1 and _useful(s, b[1]):
            sub = _classical(sr, b[1][0], rounds, done)
            return None if sub is None else Deriv(b[0], s, (sub,), principal=f)
    # propagation, then a genuine split
    split = None
    for f, side in cands:
        b = _branching(f, side, s)
        if not b or len(b[1]) != 2 or not _useful(s, b[1]):
            continue
        closed = [close(p) for p in b[1]]
        if all(c is not None for c in closed):
            return Deriv(b[0], s, tuple(closed), principal=f)
        if any(c is not None for c in closed):
            i = closed.index(None)
            sub = _classical(sr, b[1][i], rounds, done)
            if sub is None:
                return None
            closed[i] = sub
            return Deriv(b[0], s, tuple(closed), principal=f)
        if split is None:
            split = (f, b)
    if split is not None:
        f, (rule, prems) = split
        subs = []
        for p in prems:
            sub = _classical(sr, p, rounds, done)
            if sub is None:
                return None
            subs.append(sub)
        return Deriv(rule, s, tuple(subs), principal=f)
    if rounds <= 0:
        return None
    return _instantiate(sr, s, lambda p: _classical(sr, p, rounds - 1, done), both=True)


def _instantiate(sr, s, cont, both):
    """One round: add every new instance of antecedent universals (and succedent existentials)."""
    formulas = s.ante + s.succ
    steps = []
    cur = s
    for f in s.ante:
        if isinstance(f, ForAll):
            xs, tups = instances(f, formulas)
            for tup in tups:
                final = _instance_chain(f, tup)[-1]
                if alpha_key(final) in {alpha_key(g) for g in cur.ante}:
                    continue
                cur, wrap = _chain_left(cur, f, tup)
                steps.append(wrap)
    if both:
        for f in s.succ:
            if isinstance(f, Exists):
                xs, tups = instances(f, formulas)
                for tup in tups:
                    final = _instance_chain(f, tup)[-1]
                    if alpha_key(final) in {alpha_key(g) for g in cur.succ}:
                        continue
                    cur, wrap = _chain_right(cur, f, tup)
                    steps.append(wrap)
    if not steps:
        return None
    d = cont(cur)
    if d is None:
        return None
    for wrap in reversed(steps):
        d = wrap(d)
    return d


# --------------------------------------------------------------------------
# intuitionistic search

def _goal(s):
    return s.succ[0] if s.succ else None


def _with_goal(s, g):
    return Sequent(s.ante, () if g is None else (g,))


def _intuit(sr, s, rounds, budget, done):
    sr.tick()
    d = close(s)
    if d is not None:
        return d
    key = (_skey(s), rounds, budget, done)
    if key in sr.failed:
        return None
    out = _intuit_step(sr, s, rounds, budget, done)
    if out is None:
        sr.failed.add(key)
    return out


def _intuit_step(sr, s, rounds, budget, done):
    g = _goal(s)
    # invertible right rules
    if isinstance(g, And):
        a = _intuit(sr, _with_goal(s, g.left), rounds, budget, done)
        if a is None:
            return None
        b = _intuit(sr, _with_goal(s, g.right), rounds, budget, done)
        return None if b is None else Deriv("and-r", s, (a, b), principal=g)
    if isinstance(g, Implies):
        p = Sequent.of(s.ante + (g.left,), (g.right,))
        sub = _intuit(sr, p, rounds, budget, done)
        return None if sub is None else Deriv("imp-r", s, (sub,), principal=g)
    if isinstance(g, ForAll):
        y = sr.names.fresh()
        p = Sequent(s.ante, (substitute_terms(g.body, {g.var: Var(y)}),))
        sub = _intuit(sr, p, rounds, budget, done)
        return None if sub is None else Deriv("all-r", s, (sub,), principal=g, eigen=y)
    # invertible left rules
    for f in s.ante:
        if isinstance(f, And):
            p = _plus(s, ante=(f.left, f.right))
            if _useful(s, [p]):
                sub = _intuit(sr, p, rounds, budget, done)
                return None if sub is None else Deriv("and-l", s, (sub,), principal=f)
        if isinstance(f, Exists) and ("l", alpha_key(f)) not in done:
            y, p = sr.eigen(s, f, "l")
            sub = _intuit(sr, p, rounds, budget, done | {("l", alpha_key(f))})
            return None if sub is None else Deriv("ex-l", s, (sub,), principal=f, eigen=y)
    # modus ponens
    for f in s.ante:
        if isinstance(f, Implies):
            p2 = _plus(s, ante=(f.right,))
            if not _useful(s, [p2]):
                continue
            left = close(_with_goal(s, f.left))
            if left is not None:
                sub = _intuit(sr, p2, rounds, budget, done)
                return None if sub is None else Deriv("imp-l", s, (left, sub), principal=f)
    for f in s.ante:
        if isinstance(f, Or):
            ps = [_plus(s, ante=(f.left,)), _plus(s, ante=(f.right,))]
            if _useful(s, ps):
                subs = []
                for p in ps:
                    sub = _intuit(sr, p, rounds, budget, done)
                    if sub is None:
                        return None
                    subs.append(sub)
                return Deriv("or-l", s, tuple(subs), principal=f)
    # non-invertible choices
    if budget > 0:
        if isinstance(g, Or):
            for part in (g.left, g.right):
                sub = _intuit(sr, _with_goal(s, part), rounds, budget - 1, done)
                if sub is not None:
                    return Deriv("or-r", s, (sub,), principal=g)
        if isinstance(g, Exists):
            xs, tups = instances(g, s.ante + s.succ)
            for tup in tups:
                top, wrap = _chain_right(Sequent(s.ante, ()), g, tup)
                inst = top.succ[-1]
                sub = _intuit(sr, Sequent(s.ante, (inst,)), rounds, budget - 1, done)
                if sub is not None:
                    return _ex_chain(s, g, tup, sub)
        for f in s.ante:
            if isinstance(f, Implies):
                p2 = _plus(s, ante=(f.right,))
                if not _useful(s, [p2]) or (g is not None and alpha_key(f.left) == alpha_key(g)):
                    continue
                left = _intuit(sr, _with_goal(s, f.left), rounds, budget - 1, done)
                if left is None:
                    continue
                right = _intuit(sr, p2, rounds, budget - 1, done)
                if right is not None:
                    return Deriv("imp-l", s, (left, right), principal=f)
    if rounds <= 0:
        return None
    return _instantiate(sr, s, lambda p: _intuit(sr, p, rounds - 1, budget, done), both=False)


def _ex_chain(s, g, tup, sub):
    """``ex-r`` chain whose intermediate sequents keep a single succedent formula."""
    chain = _instance_chain(g, tup)
    principals = [g] + chain[:-1]
    d = sub
    for i in range(len(tup) - 1, -1, -1):
        d = Deriv("ex-r", Sequent(s.ante, (principals[i],)), (d,), principal=principals[i], term=tup[i])
    return d


# --------------------------------------------------------------------------
# entry point

def _with_theory(s: Sequent, theory):
    cur, seqs = s, []
    for ax in theory:
        if alpha_key(ax) in {alpha_key(f) for f in cur.ante}:
            continue
        seqs.append((cur, ax))
        cur = _plus(cur, ante=(ax,))

    def wrap(d):
        for base, ax in reversed(seqs):
            d = Deriv("thax-l", base, (d,), principal=ax)
        return d
    return cur, wrap


def prove_fo(sequent: Sequent, depth: int = 6, theory=None, mode: str = CLASSICAL):
    """A cut-free first-order derivation of ``sequent`` found within ``depth``, or ``None``.

    Iterative deepening: the result for the smallest sufficient depth is
    returned, so larger depths give the identical derivation.
    """
    theory = as_theory(theory)
    if not all(is_first_order(f) for f in sequent.formulas()):
        raise ValueError("prove_fo needs a first-order sequent")
    if mode == INTUITIONISTIC and len(sequent.succ) > 1:
        raise ValueError("intuitionistic sequents have at most one succedent formula")
    sequent = Sequent.of(sequent.ante, sequent.succ)
    start, wrap = _with_theory(sequent, theory.axioms)
    for r in range(0, depth + 1):
        sr = _Search(sequent, theory.axioms)
        try:
            if mode == INTUITIONISTIC:
                d = _intuit(sr, start, r, r, frozenset())
            else:
                d = _classical(sr, start, r, frozenset())
        except _OutOfSteps:
            d = None
        if d is not None:
            return wrap(d)
    return None
