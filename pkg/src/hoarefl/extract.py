"""From sequent derivations back to Hoare derivations.

Relational quantifiers are eliminated by expanding them over the
eigen-predicates a derivation actually uses; the expanded derivation is
first-order, and first-order facts about program translations are turned
into midconditions by interpolation.
"""
from __future__ import annotations

from dataclasses import dataclass, replace
from functools import lru_cache

from .sequent import Deriv
from .syntax import (
    And, Exists, ForAll, ForAll2, Implies, Or, Predicate, Sequent, Var, alpha_eq, alpha_key,
    free_vars, is_negative_sequent, predicate_key, substitute_terms,
)
from .translate import _expand, make_xi, rename_entry


class ExtractionError(ValueError):
    pass


def _has_forall2(p) -> bool:
    if isinstance(p, ForAll2):
        return True
    if isinstance(p, (And, Or, Implies)):
        return _has_forall2(p.left) or _has_forall2(p.right)
    if isinstance(p, (ForAll, Exists)):
        return _has_forall2(p.body)
    return False


class _Expander:
    def __init__(self, xi):
        self.xi = make_xi(xi)
        self.formula = lru_cache(maxsize=None)(lambda f: _expand(f, self.xi))

    def sequent(self, s: Sequent) -> Sequent:
        return Sequent.of(tuple(map(self.formula, s.ante)), tuple(map(self.formula, s.succ)))

    def entry(self, body_x, pred):
        """Index and renamed copy of the Xi entry matching ``pred``."""
        key = predicate_key(pred)
        for i, e in enumerate(self.xi):
            if predicate_key(e.pred) == key:
                return i, rename_entry(body_x, e)
        raise ExtractionError("eigen-predicate missing from Xi")


# --------------------------------------------------------------------------
# expansion of derivations

def expand_derivation(d: Deriv, xi) -> Deriv:
    """First-order derivation of the expanded end-sequent.

    Every sequent of ``d`` must be negative; each ``all2-l`` becomes a
    selection of the matching conjunct followed by ``all-l`` on its side
    variables.
    """
    ex = _Expander(xi)

    def go(node: Deriv) -> Deriv:
        if not is_negative_sequent(node.conclusion):
            raise ExtractionError("expansion needs negative sequents throughout")
        if node.rule == "all2-r":
            raise ExtractionError("all2-r cannot occur in a derivation of a negative sequent")
        if node.rule == "cut":
            raise ExtractionError("expansion needs a cut-free derivation")
        conc = ex.sequent(node.conclusion)
        prems = tuple(go(p) for p in node.premises)
        if node.rule == "all2-l":
            return _select(ex, node, conc, prems[0])
        pred = node.pred
        if pred is not None:
            pred = Predicate(pred.params, ex.formula(pred.body))
        principal = ex.formula(node.principal) if node.principal is not None else None
        return replace(node, conclusion=conc, premises=prems, principal=principal, pred=pred)

    return go(d)


def _select(ex: _Expander, node: Deriv, conc: Sequent, premise: Deriv) -> Deriv:
    """``and-l`` down to the conjunct of ``node.pred``, then ``all-l`` at its side variables."""
    p = node.principal
    body_x = ex.formula(p.body)
    i, e = ex.entry(body_x, node.pred)
    original = ex.xi[i].side
    whole = ex.formula(p)
    steps = []                       # (rule, principal, term)
    f, n = whole, len(ex.xi)
    for _ in range(i):
        steps.append(("and-l", f, None))
        f = f.right
    if i < n - 1:
        steps.append(("and-l", f, None))
        f = f.left
    for new, old in zip(e.side, original):
        steps.append(("all-l", f, Var(old)))
        f = substitute_terms(f.body, {new: Var(old)})
    ante = list(conc.ante)
    seqs = []
    for rule, g, t in steps:
        seqs.append(Sequent.of(tuple(ante), conc.succ))
        ante += [g.left, g.right] if rule == "and-l" else [substitute_terms(g.body, {g.var: t})]
    out = premise
    for (rule, g, t), s in zip(reversed(steps), reversed(seqs)):
        out = Deriv(rule, s, (out,), principal=g, term=t)
    return out if steps else premise.reconclude(conc)


# --------------------------------------------------------------------------
# lifting expanded derivations back

def unexpand(d_fl: Deriv, sigma: Sequent, xi) -> Deriv:
    """Derivation of ``sigma`` from a derivation of its expansion, using cut.

    Each antecedent formula ``G`` is traded for its expansion by a cut with
    ``G |- G^xi``, each succedent formula ``H`` by a cut with ``H^xi |- H``.
    """
    ex = _Expander(xi)
    if not is_negative_sequent(sigma):
        raise ExtractionError("only negative sequents can be lifted")
    target = ex.sequent(sigma)
    have = {alpha_key(f) for f in d_fl.conclusion.ante}, {alpha_key(f) for f in d_fl.conclusion.succ}
    want = {alpha_key(f) for f in target.ante}, {alpha_key(f) for f in target.succ}
    if not (have[0] <= want[0] and have[1] <= want[1]):
        raise ExtractionError("derivation does not end in the expanded sequent")
    ante = [ex.formula(g) for g in sigma.ante]
    succ = [ex.formula(h) for h in sigma.succ]
    out = d_fl
    for k, g in enumerate(sigma.ante):
        gx = ante[k]
        if alpha_eq(g, gx):
            continue
        ante[k] = g
        s = Sequent.of(tuple(ante), tuple(succ))
        out = Deriv("cut", s, (_pos(ex, g), out), principal=gx)
    for k, h in enumerate(sigma.succ):
        hx = succ[k]
        if alpha_eq(h, hx):
            continue
        succ[k] = h
        s = Sequent.of(tuple(ante), tuple(succ))
        out = Deriv("cut", s, (out, _neg(ex, h)), principal=hx)
    return out


def _pos(ex: _Expander, f) -> Deriv:
    """``f |- f^xi`` for ``f`` whose relational quantifiers are all positive."""
    fx = ex.formula(f)
    s = Sequent((f,), (fx,))
    if not _has_forall2(f):
        return Deriv("axiom", s, principal=f)
    if isinstance(f, And):
        inner = Deriv("and-r", Sequent((f, f.left, f.right), (fx,)),
                      (_pos(ex, f.left), _pos(ex, f.right)), principal=fx)
        return Deriv("and-l", s, (inner,), principal=f)
    if isinstance(f, Or):
        branches = tuple(Deriv("or-r", Sequent((f, part), (fx,)), (_pos(ex, part),), principal=fx)
                         for part in (f.left, f.right))
        return Deriv("or-l", s, branches, principal=f)
    if isinstance(f, Implies):
        inner = Deriv("imp-l", Sequent((f, fx.left), (fx.right,)),
                      (_neg(ex, f.left), _pos(ex, f.right)), principal=f)
        return Deriv("imp-r", s, (inner,), principal=fx)
    if isinstance(f, ForAll):
        inner = Deriv("all-l", Sequent((f,), (fx.body,)), (_pos(ex, f.body),),
                      principal=f, term=Var(f.var))
        return Deriv("all-r", s, (inner,), principal=fx, eigen=f.var)
    if isinstance(f, Exists):
        inner = Deriv("ex-r", Sequent((f, f.body), (fx,)), (_pos(ex, f.body),),
                      principal=fx, term=Var(f.var))
        return Deriv("ex-l", s, (inner,), principal=f, eigen=f.var)
    return _pos_forall2(ex, f, fx)


def _pos_forall2(ex: _Expander, f: ForAll2, fx) -> Deriv:
    from .syntax import substitute_predicate
    body_x = ex.formula(f.body)

    def instance(item, entry):
        e = rename_entry(body_x, entry)
        inst = substitute_predicate(f.body, f.rel, e.pred)
        goal = item
        for _ in e.side:
            goal = goal.body
        d = Deriv("all2-l", Sequent((f,), (goal,)), (_pos(ex, inst),), principal=f, pred=e.pred)
        for name, sub in reversed(list(zip(e.side, _bodies(item, len(e.side))))):
            d = Deriv("all-r", Sequent((f,), (sub,)), (d,), principal=sub, eigen=name)
        return d

    def tree(g, entries):
        if len(entries) == 1:
            return instance(g, entries[0])
        return Deriv("and-r", Sequent((f,), (g,)),
                     (instance(g.left, entries[0]), tree(g.right, entries[1:])), principal=g)

    if not ex.xi:
        return Deriv("top-r", Sequent((f,), (fx,)), principal=fx)
    return tree(fx, list(ex.xi))


def _bodies(item, n):
    """``item`` and its first ``n - 1`` universal bodies, outermost first."""
    out = []
    for _ in range(n):
        out.append(item)
        item = item.body
    return out


def _neg(ex: _Expander, f) -> Deriv:
    """``f^xi |- f`` for ``f`` whose relational quantifiers are all negative."""
    fx = ex.formula(f)
    s = Sequent((fx,), (f,))
    if not _has_forall2(f):
        return Deriv("axiom", s, principal=f)
    if isinstance(f, And):
        inner = Deriv("and-r", Sequent((fx, fx.left, fx.right), (f,)),
                      (_neg(ex, f.left), _neg(ex, f.right)), principal=f)
        return Deriv("and-l", s, (inner,), principal=fx)
    if isinstance(f, Or):
        branches = tuple(Deriv("or-r", Sequent((fx, part_x), (f,)), (_neg(ex, part),), principal=f)
                         for part, part_x in ((f.left, fx.left), (f.right, fx.right)))
        return Deriv("or-l", s, branches, principal=fx)
    if isinstance(f, Implies):
        inner = Deriv("imp-l", Sequent((fx, f.left), (f.right,)),
                      (_pos(ex, f.left), _neg(ex, f.right)), principal=fx)
        return Deriv("imp-r", s, (inner,), principal=f)
    if isinstance(f, ForAll):
        inner = Deriv("all-l", Sequent((fx,), (f.body,)), (_neg(ex, f.body),),
                      principal=fx, term=Var(f.var))
        return Deriv("all-r", s, (inner,), principal=f, eigen=f.var)
    if isinstance(f, Exists):
        inner = Deriv("ex-r", Sequent((fx, fx.body), (f,)), (_neg(ex, f.body),),
                      principal=f, term=Var(f.var))
        return Deriv("ex-l", s, (inner,), principal=fx, eigen=f.var)
    raise ExtractionError("relational quantifier in a negative position")


# --------------------------------------------------------------------------
# interpolation

class InterpolationError(ExtractionError):
    pass


@dataclass(frozen=True)
class Partition:
    """A split of a sequent's formulas into a left and a right part."""
    left: Sequent
    right: Sequent

    @classmethod
    def split(cls, s: Sequent, left_ante=(), left_succ=()):
        """Formulas of ``s`` at the given indices go left, the rest right."""
        la, ls = set(left_ante), set(left_succ)
        return cls(
            Sequent(tuple(f for i, f in enumerate(s.ante) if i in la),
                    tuple(f for i, f in enumerate(s.succ) if i in ls)),
            Sequent(tuple(f for i, f in enumerate(s.ante) if i not in la),
                    tuple(f for i, f in enumerate(s.succ) if i not in ls)),
        )

    def covers(self, s: Sequent) -> bool:
        def keys(fs):
            return [alpha_key(f) for f in fs]
        a = keys(self.left.ante) + keys(self.right.ante)
        b = keys(self.left.succ) + keys(self.right.succ)
        return (len(set(a)) == len(a) and set(a) == set(keys(s.ante))
                and len(set(b)) == len(b) and set(b) == set(keys(s.succ)))


def colorings(s: Sequent):
    """Every partition of ``s``, each formula going left or right."""
    n, m = len(s.ante), len(s.succ)
    for mask in range(1 << (n + m)):
        yield Partition.split(s, [i for i in range(n) if mask >> i & 1],
                              [j for j in range(m) if mask >> (n + j) & 1])


@dataclass(frozen=True)
class Interpolant:
    """``formula`` with derivations of ``left |- formula`` and ``formula, right |-``.

    Precisely, ``left`` derives a subsequent of ``L_ante |- L_succ, formula``
    and ``right`` one of ``formula, R_ante |- R_succ``.
    """
    formula: object
    left: Deriv
    right: Deriv


def vocabulary(fs, theory=()) -> tuple:
    """(symbols, free variables) of formulas; theory symbols are included."""
    from .syntax import free_vars, symbols
    syms, fv = set(), set()
    for f in fs:
        syms |= symbols(f)
        fv |= free_vars(f)
    for ax in theory:
        syms |= symbols(ax)
    return syms, fv


def vocabulary_ok(chi, p: Partition, theory=()) -> bool:
    """Every symbol and free variable of ``chi`` occurs on both sides."""
    from .syntax import free_vars, symbols
    ls, lv = vocabulary(p.left.formulas(), theory)
    rs, rv = vocabulary(p.right.formulas(), theory)
    return symbols(chi) <= (ls & rs) and free_vars(chi) <= (lv & rv)


_SUCC_RULES = {"and-r", "or-r", "imp-r", "all-r", "ex-r", "repl-r", "refl", "top-r", "thax"}
_ANTE_RULES = {"and-l", "or-l", "imp-l", "all-l", "ex-l", "repl-l", "bot-l"}


def _S(ante, succ) -> Sequent:
    return Sequent.of(tuple(ante), tuple(succ))


def _drop(d: Deriv, f, where: str) -> Deriv:
    """``d`` with ``true`` removed from antecedents (``where='ante'``) or ``false`` from succedents."""
    key = alpha_key(f)

    def keep(fs):
        return tuple(g for g in fs if alpha_key(g) != key)

    def go(node):
        c = node.conclusion
        c = Sequent(keep(c.ante), c.succ) if where == "ante" else Sequent(c.ante, keep(c.succ))
        principal_hit = node.principal is not None and alpha_key(node.principal) == key
        if principal_hit and node.rule == "axiom":
            return Deriv("top-r" if where == "ante" else "bot-l", c, principal=node.principal)
        if principal_hit and node.rule == ("repl-l" if where == "ante" else "repl-r"):
            return go(node.premises[1])
        return replace(node, conclusion=c, premises=tuple(go(p) for p in node.premises))

    return go(d)


def _rename_deriv(d: Deriv, old, new: Var) -> Deriv:
    """Replace the variable or constant ``old`` by the fresh variable ``new`` throughout."""
    from .syntax import replace_term

    if isinstance(old, Var):
        def fix(e):
            return substitute_terms(e, {old.name: new})
    else:
        def fix(e):
            return replace_term(e, old, new)

    def go(node):
        c = node.conclusion
        return replace(
            node,
            conclusion=Sequent(tuple(map(fix, c.ante)), tuple(map(fix, c.succ))),
            premises=tuple(go(p) for p in node.premises),
            principal=fix(node.principal) if node.principal is not None else None,
            term=fix(node.term) if node.term is not None else None,
            eigen=new.name if isinstance(old, Var) and node.eigen == old.name else node.eigen,
            pred=Predicate(node.pred.params, fix(node.pred.body)) if node.pred is not None else None,
            lhs=fix(node.lhs) if node.lhs is not None else None,
            rhs=fix(node.rhs) if node.rhs is not None else None,
        )

    return go(d)


class _Maehara:
    def __init__(self, d: Deriv, theory, depth: int):
        from .sequent import CLASSICAL, FL, RuleSet
        from .translate import Namer, all_names
        self.theory = theory
        self.depth = depth
        self.rules = RuleSet(FL, CLASSICAL, False)
        self.theory_syms = vocabulary((), theory)[0]
        names = set()
        for node in d.nodes():
            for f in node.conclusion.formulas():
                names |= all_names(f)
            if node.eigen:
                names.add(node.eigen)
        self.namer = Namer(names)

    # node: returns (chi, wa, wb)
    def run(self, d: Deriv, La, Ls, Ra, Rs):
        from .sequent import expected_premises
        from .syntax import FALSE, TRUE, Not
        r = d.rule
        if r in ("cut", "all2-l", "all2-r"):
            raise InterpolationError(f"{r} cannot be interpolated")
        lak, lsk = {alpha_key(f) for f in La}, {alpha_key(f) for f in Ls}
        if r == "axiom":
            k = alpha_key(d.principal)
            a, s = ("L" if k in lak else "R"), ("L" if k in lsk else "R")
            p = d.principal
            if (a, s) == ("L", "L"):
                out = FALSE, Deriv("axiom", _S(La, Ls + (FALSE,)), principal=p), \
                    Deriv("bot-l", _S((FALSE,) + Ra, Rs), principal=FALSE)
            elif (a, s) == ("R", "R"):
                out = TRUE, Deriv("top-r", _S(La, Ls + (TRUE,)), principal=TRUE), \
                    Deriv("axiom", _S((TRUE,) + Ra, Rs), principal=p)
            elif (a, s) == ("L", "R"):
                out = p, Deriv("axiom", _S(La, Ls + (p,)), principal=p), \
                    Deriv("axiom", _S((p,) + Ra, Rs), principal=p)
            else:
                n = Not(p)
                wa = Deriv("imp-r", _S(La, Ls + (n,)),
                           (Deriv("axiom", _S(La + (p,), Ls), principal=p),), principal=n)
                wb = Deriv("imp-l", _S((n,) + Ra, Rs),
                           (Deriv("axiom", _S(Ra, (p,)), principal=p),
                            Deriv("bot-l", _S((FALSE,) + Ra, Rs), principal=FALSE)), principal=n)
                out = n, wa, wb
            return self.generalize(out, La, Ls, Ra, Rs)
        if r == "thax-l":
            side = "R"
        elif r in _SUCC_RULES:
            side = "L" if alpha_key(d.principal) in lsk else "R"
        elif r in _ANTE_RULES:
            side = "L" if alpha_key(d.principal) in lak else "R"
        else:
            raise InterpolationError(f"unknown rule {r!r}")
        if not d.premises:
            # refl, top-r, thax, bot-l
            if side == "L":
                out = FALSE, replace(d, conclusion=_S(La, Ls + (FALSE,))), \
                    Deriv("bot-l", _S((FALSE,) + Ra, Rs), principal=FALSE)
            else:
                out = TRUE, Deriv("top-r", _S(La, Ls + (TRUE,)), principal=TRUE), \
                    replace(d, conclusion=_S((TRUE,) + Ra, Rs))
            return out
        aux = expected_premises(d, self.rules, self.theory)
        subs = []
        for prem, (aa, ss) in zip(d.premises, aux):
            aak, ssk = {alpha_key(f) for f in aa}, {alpha_key(f) for f in ss}
            pla, pls, pra, prs = [], [], [], []
            for f in prem.conclusion.ante:
                k = alpha_key(f)
                ((pla if side == "L" else pra) if k in aak else (pla if k in lak else pra)).append(f)
            for f in prem.conclusion.succ:
                k = alpha_key(f)
                ((pls if side == "L" else prs) if k in ssk else (pls if k in lsk else prs)).append(f)
            subs.append(self.run(prem, tuple(pla), tuple(pls), tuple(pra), tuple(prs)))
        if len(subs) == 1:
            chi, wa, wb = subs[0]
            if side == "L":
                wa = replace(d, conclusion=_S(La, Ls + (chi,)), premises=(wa,))
            else:
                wb = replace(d, conclusion=_S((chi,) + Ra, Rs), premises=(wb,))
            out = chi, wa, wb
        elif side == "L":
            out = self.join_or(d, subs, La, Ls, Ra, Rs)
        else:
            out = self.join_and(d, subs, La, Ls, Ra, Rs)
        return self.generalize(out, La, Ls, Ra, Rs)

    def join_or(self, d, subs, La, Ls, Ra, Rs):
        from .syntax import FALSE, TRUE, Bot, Top
        (c1, a1, b1), (c2, a2, b2) = subs
        if isinstance(c1, Top) or isinstance(c2, Top):
            return TRUE, Deriv("top-r", _S(La, Ls + (TRUE,)), principal=TRUE), \
                (b1 if isinstance(c1, Top) else b2)
        if isinstance(c1, Bot):
            return c2, replace(d, conclusion=_S(La, Ls + (c2,)), premises=(_drop(a1, FALSE, "succ"), a2)), b2
        if isinstance(c2, Bot):
            return c1, replace(d, conclusion=_S(La, Ls + (c1,)), premises=(a1, _drop(a2, FALSE, "succ"))), b1
        if alpha_eq(c1, c2):
            return c1, replace(d, conclusion=_S(La, Ls + (c1,)), premises=(a1, a2)), b1
        chi = Or(c1, c2)
        inner = replace(d, conclusion=_S(La, Ls + (c1, c2)), premises=(a1, a2))
        wa = Deriv("or-r", _S(La, Ls + (chi,)), (inner,), principal=chi)
        wb = Deriv("or-l", _S((chi,) + Ra, Rs), (b1, b2), principal=chi)
        return chi, wa, wb

    def join_and(self, d, subs, La, Ls, Ra, Rs):
        from .syntax import FALSE, TRUE, Bot, Top
        (c1, a1, b1), (c2, a2, b2) = subs
        if isinstance(c1, Bot) or isinstance(c2, Bot):
            return FALSE, (a1 if isinstance(c1, Bot) else a2), \
                Deriv("bot-l", _S((FALSE,) + Ra, Rs), principal=FALSE)
        if isinstance(c1, Top):
            return c2, a2, replace(d, conclusion=_S((c2,) + Ra, Rs), premises=(_drop(b1, TRUE, "ante"), b2))
        if isinstance(c2, Top):
            return c1, a1, replace(d, conclusion=_S((c1,) + Ra, Rs), premises=(b1, _drop(b2, TRUE, "ante")))
        if alpha_eq(c1, c2):
            return c1, a1, replace(d, conclusion=_S((c1,) + Ra, Rs), premises=(b1, b2))
        chi = And(c1, c2)
        wa = Deriv("and-r", _S(La, Ls + (chi,)), (a1, a2), principal=chi)
        inner = replace(d, conclusion=_S((c1, c2) + Ra, Rs), premises=(b1, b2))
        wb = Deriv("and-l", _S((chi,) + Ra, Rs), (inner,), principal=chi)
        return chi, wa, wb

    def generalize(self, out, La, Ls, Ra, Rs):
        """Quantify away symbols of the interpolant that are not shared."""
        from .syntax import App, free_vars, symbols
        chi, wa, wb = out
        lsyms, lvars = vocabulary(La + Ls)
        rsyms, rvars = vocabulary(Ra + Rs)
        lsyms |= self.theory_syms
        rsyms |= self.theory_syms
        while True:
            bad_vars = sorted(v for v in free_vars(chi) if not (v in lvars and v in rvars))
            bad_syms = sorted(s for s in symbols(chi) if not (s in lsyms and s in rsyms))
            bad_fns = [s for s in bad_syms if s[0] == "f" and s[2]]
            if bad_fns:
                # whole terms first: a variable bound inside one would block the abstraction
                name = bad_fns[0][1]
                return self.abstract(chi, name, bad_fns[0] not in lsyms, La, Ls, Ra, Rs)
            if bad_vars:
                old, universal = Var(bad_vars[0]), bad_vars[0] not in lvars
            elif bad_syms:
                kind, name, arity = bad_syms[0]
                if kind != "f":
                    raise InterpolationError(f"relation symbol {name} is not shared")
                old, universal = App(name, ()), bad_syms[0] not in lsyms
            else:
                return chi, wa, wb
            y = Var(self.namer.name("y"))
            body = _rename_formula(chi, old, y)
            if universal:
                g = ForAll(y.name, body)
                wa = Deriv("all-r", _S(La, Ls + (g,)), (_rename_deriv(wa, old, y),),
                           principal=g, eigen=y.name)
                wb = Deriv("all-l", _S((g,) + Ra, Rs), (wb,), principal=g, term=old)
            else:
                g = Exists(y.name, body)
                wa = Deriv("ex-r", _S(La, Ls + (g,)), (wa,), principal=g, term=old)
                wb = Deriv("ex-l", _S((g,) + Ra, Rs), (_rename_deriv(wb, old, y),),
                           principal=g, eigen=y.name)
            chi = g

    def abstract(self, chi, fn, universal, La, Ls, Ra, Rs):
        """Replace maximal ``fn``-terms by quantified variables; witnesses come from the prover.

        A function symbol cannot be renamed into a variable inside a
        derivation, so this case falls back on proof search.
        """
        from .prover import prove_fo
        from .sequent import CLASSICAL
        before = chi
        chi = _abstract_fn(chi, fn, ForAll if universal else Exists, self.namer)
        if alpha_eq(chi, before):
            raise InterpolationError(f"cannot abstract function symbol {fn} from the interpolant")
        wa = prove_fo(_S(La, Ls + (chi,)), self.depth, self.theory, CLASSICAL)
        wb = prove_fo(_S((chi,) + Ra, Rs), self.depth, self.theory, CLASSICAL) if wa else None
        if wa is None or wb is None:
            raise InterpolationError(f"cannot abstract function symbol {fn} from the interpolant")
        return self.generalize((chi, wa, wb), La, Ls, Ra, Rs)


def _abstract_fn(f, fn, q, namer):
    """Replace maximal ``fn``-terms by variables quantified by ``q`` just inside the innermost binder of their variables."""
    from .syntax import replace_term, term_vars

    def wrap(body, var):
        terms = [t for t in _maximal_terms(body, fn) if var is None or var in term_vars(t)]
        names = []
        for t in terms:
            y = namer.name("y")
            names.append(y)
            body = replace_term(body, t, Var(y))
        for y in reversed(names):
            body = q(y, body)
        return body

    def go(p):
        if isinstance(p, (ForAll, Exists)):
            return type(p)(p.var, wrap(go(p.body), p.var))
        if isinstance(p, (And, Or, Implies)):
            return type(p)(go(p.left), go(p.right))
        return p
    return wrap(go(f), None)


def _rename_formula(f, old, new: Var):
    from .syntax import replace_term
    if isinstance(old, Var):
        return substitute_terms(f, {old.name: new})
    return replace_term(f, old, new)


def _maximal_terms(f, fn) -> list:
    """Outermost free subterms of ``f`` headed by ``fn``, in order of first occurrence."""
    from .syntax import App, Eq, Rel, RelVar, term_vars
    out = []

    def term(t, bound):
        if isinstance(t, App):
            if t.fn == fn and not (term_vars(t) & bound):
                if t not in out:
                    out.append(t)
                return
            for a in t.args:
                term(a, bound)

    def go(p, bound):
        if isinstance(p, Eq):
            term(p.lhs, bound)
            term(p.rhs, bound)
        elif isinstance(p, (Rel, RelVar)):
            for a in p.args:
                term(a, bound)
        elif isinstance(p, (And, Or, Implies)):
            go(p.left, bound)
            go(p.right, bound)
        elif isinstance(p, (ForAll, Exists)):
            go(p.body, bound | {p.var})

    go(f, frozenset())
    return out


def interpolate(d: Deriv, p: Partition, theory=None, depth: int = 6) -> Interpolant:
    """Craig interpolant of a cut-free first-order derivation for the partition ``p``.

    Equality and the propositional constants are logical; theory symbols
    count as shared.
    """
    import sys
    from .sequent import as_theory
    theory = as_theory(theory)
    if not p.covers(d.conclusion):
        raise InterpolationError("partition does not cover the end-sequent")
    if "cut" in d.rules_used():
        raise InterpolationError("interpolation needs a cut-free derivation")
    sys.setrecursionlimit(max(sys.getrecursionlimit(), 20000))
    m = _Maehara(d, theory, depth)
    chi, wa, wb = m.run(d, p.left.ante, p.left.succ, p.right.ante, p.right.succ)
    return Interpolant(chi, wa, wb)


# --------------------------------------------------------------------------
# inversion of cut-free derivations

_LEFT = {"and-l", "or-l", "imp-l", "all-l", "ex-l", "repl-l", "bot-l", "all2-l"}
_RIGHT = {"and-r", "or-r", "imp-r", "all-r", "ex-r", "repl-r", "refl", "top-r", "thax", "all2-r"}


def _names(d: Deriv) -> set:
    from .translate import all_names
    out = set()
    for node in d.nodes():
        for f in node.conclusion.formulas():
            out |= all_names(f)
        if node.eigen:
            out.add(node.eigen)
        if node.term is not None:
            out |= all_names(node.term)
    return out


def _free_name(d: Deriv, name: str, namer) -> Deriv:
    """Rename every use of ``name`` in ``d`` away, so it can be introduced afresh."""
    from .syntax import free_vars
    if name not in _names(d):
        return d
    if name in free_vars(d.conclusion):
        raise ExtractionError(f"variable {name} is already free in the end-sequent")
    return _rename_deriv(d, Var(name), Var(namer.name(name)))


def _invert(d: Deriv, f, side: str, ante_add, succ_add, rule, at_principal, at_axiom) -> Deriv:
    """Replace ``f`` on ``side`` by the given formulas in every sequent that has it."""
    key = alpha_key(f)
    own = _LEFT if side == "ante" else _RIGHT

    def has(node):
        fs = node.conclusion.ante if side == "ante" else node.conclusion.succ
        return any(alpha_key(g) == key for g in fs)

    def conc(node):
        c = node.conclusion
        if side == "ante":
            return _S(tuple(g for g in c.ante if alpha_key(g) != key) + tuple(ante_add),
                      c.succ + tuple(succ_add))
        return _S(c.ante + tuple(ante_add),
                  tuple(g for g in c.succ if alpha_key(g) != key) + tuple(succ_add))

    def go(node):
        if not has(node):
            return node
        p = node.principal
        if p is not None and alpha_key(p) == key:
            if node.rule == "axiom":
                return at_axiom(conc(node))
            if node.rule in own:
                if node.rule != rule:
                    raise ExtractionError(f"cannot invert {rule} through {node.rule}")
                return at_principal(node, go)
        return replace(node, conclusion=conc(node), premises=tuple(go(q) for q in node.premises))

    return go(d)


def _ax(f) -> Deriv:
    return Deriv("axiom", Sequent((f,), (f,)), principal=f)


def invert_and_l(d: Deriv, f: And) -> Deriv:
    return _invert(d, f, "ante", (f.left, f.right), (), "and-l",
                   lambda node, go: go(node.premises[0]),
                   lambda c: Deriv("and-r", c, (_ax(f.left), _ax(f.right)), principal=f))


def invert_or_l(d: Deriv, f: Or) -> tuple:
    def branch(i, part):
        return _invert(d, f, "ante", (part,), (), "or-l",
                       lambda node, go: go(node.premises[i]),
                       lambda c: Deriv("or-r", c, (_ax(part),), principal=f))
    return branch(0, f.left), branch(1, f.right)


def invert_ex_l(d: Deriv, f: Exists, name: str, namer) -> Deriv:
    d = _free_name(d, name, namer)
    inst = substitute_terms(f.body, {f.var: Var(name)})

    def at_principal(node, go):
        return go(_rename_deriv(node.premises[0], Var(node.eigen), Var(name)))
    return _invert(d, f, "ante", (inst,), (), "ex-l", at_principal,
                   lambda c: Deriv("ex-r", c, (_ax(inst),), principal=f, term=Var(name)))


def invert_imp_r(d: Deriv, f: Implies) -> Deriv:
    return _invert(d, f, "succ", (f.left,), (f.right,), "imp-r",
                   lambda node, go: go(node.premises[0]),
                   lambda c: Deriv("imp-l", c, (_ax(f.left), _ax(f.right)), principal=f))


def invert_all_r(d: Deriv, f: ForAll, name: str, namer) -> Deriv:
    d = _free_name(d, name, namer)
    inst = substitute_terms(f.body, {f.var: Var(name)})

    def at_principal(node, go):
        return go(_rename_deriv(node.premises[0], Var(node.eigen), Var(name)))
    return _invert(d, f, "succ", (), (inst,), "all-r", at_principal,
                   lambda c: Deriv("all-l", c, (_ax(inst),), principal=f, term=Var(name)))


# --------------------------------------------------------------------------
# side conditions of assignments and tests from their facts

def _subst_deriv(d: Deriv, m: dict) -> Deriv:
    """Substitute terms for free variables throughout; eigenvariables must not be in ``m``."""
    from .syntax import subst_term

    def fix(e):
        return substitute_terms(e, m)

    def go(node):
        c = node.conclusion
        return replace(
            node,
            conclusion=Sequent(tuple(map(fix, c.ante)), tuple(map(fix, c.succ))),
            premises=tuple(go(p) for p in node.premises),
            principal=fix(node.principal) if node.principal is not None else None,
            term=subst_term(node.term, m) if node.term is not None else None,
            pred=Predicate(node.pred.params, fix(node.pred.body)) if node.pred is not None else None,
            lhs=subst_term(node.lhs, m) if node.lhs is not None else None,
            rhs=subst_term(node.rhs, m) if node.rhs is not None else None,
        )
    return go(d)


def _freshen_eigens(d: Deriv, bad: set, namer) -> Deriv:
    """Rename eigenvariables in ``bad`` (within their own subderivations)."""
    def go(node):
        if node.eigen in bad:
            new = namer.name(node.eigen)
            prem = _rename_deriv(node.premises[0], Var(node.eigen), Var(new))
            return replace(node, eigen=new, premises=(go(prem),))
        return replace(node, premises=tuple(go(p) for p in node.premises))
    return go(d)


def _drop_refl(d: Deriv, atoms) -> Deriv:
    """Remove antecedent hypotheses ``t = t``; an axiom on one becomes reflexivity."""
    keys = {alpha_key(a) for a in atoms}

    def go(node):
        c = node.conclusion
        c = Sequent(tuple(f for f in c.ante if alpha_key(f) not in keys), c.succ)
        p = node.principal
        if p is not None and alpha_key(p) in keys:
            if node.rule == "axiom":
                return Deriv("refl", c, principal=p)
            if node.rule in _LEFT:
                raise ExtractionError(f"cannot discharge an equation used by {node.rule}")
        return replace(node, conclusion=c, premises=tuple(go(q) for q in node.premises))
    return go(d)


def _conj_spine(f, n: int) -> list:
    """The ``n`` conjuncts of a right-nested conjunction."""
    out = []
    for _ in range(n - 1):
        out.append(f.left)
        f = f.right
    out.append(f)
    return out



# --------------------------------------------------------------------------
# Hoare derivations from first-order facts

@dataclass(frozen=True)
class _Fact:
    """A derivation of ``pre, m |- post`` where ``m`` translates the program from ``ins`` to ``outs``."""
    deriv: Deriv
    ins: tuple
    outs: tuple
    pre: object
    m: object


class _Extractor:
    def __init__(self, pca, xi, theory, depth, avoid):
        from .syntax import program_vars
        from .translate import Namer
        self.frame = tuple(program_vars(pca.prog))
        self.ex = _Expander(xi)
        self.theory = theory
        self.depth = depth
        self.namer = Namer(avoid)

    # helpers
    def vec(self, prefix: str) -> tuple:
        return tuple(self.namer.vector(prefix, len(self.frame)))

    def at(self, f, vec):
        return substitute_terms(f, {x: Var(v) for x, v in zip(self.frame, vec) if x != v})

    def M(self, prog, ins, outs):
        from .translate import translate_program
        t = translate_program(prog, self.frame, list(ins), list(outs), avoid=self.namer.used)
        return self.ex.formula(t.formula)

    def prove(self, goal) -> Deriv:
        from .prover import prove_fo
        from .sequent import CLASSICAL
        from .text import print_formula
        d = prove_fo(Sequent((), (goal,)), self.depth, self.theory, CLASSICAL)
        if d is None:
            raise ExtractionError(f"obligation unproven at depth {self.depth}: |- {print_formula(goal)}")
        return d

    def discharge(self, fact: _Fact, terms, eqs) -> Deriv:
        """Substitute the frame for the inputs and ``terms`` for the outputs, then drop ``t = t``."""
        d = fact.deriv
        f = fact.m
        for _ in eqs[:-1]:
            d = invert_and_l(d, f)
            f = f.right
        m = {i: Var(x) for i, x in zip(fact.ins, self.frame)}
        m.update({o: t for o, t in zip(fact.outs, terms)})
        bad = set(fact.ins) | set(fact.outs) | set(self.frame) | set().union(*(free_vars(t) for t in terms))
        self.fresh_in(d)
        d = _freshen_eigens(d, bad, self.namer)
        d = _subst_deriv(d, m)
        return _drop_refl(d, [substitute_terms(e, m) for e in eqs])

    def fresh_in(self, d: Deriv) -> None:
        self.namer.used |= _names(d)

    # the induction on the program
    def build(self, prog, pre, post, fact: _Fact):
        from . import hoare as H
        from .syntax import Assign, Seq, Star, Test, Union
        if isinstance(prog, Assign):
            core = H.assignment(prog, post)
            if core.conclusion.pre == pre:
                return core
            g1, g2 = H.consequence_goals(H.Pca(pre, prog, post), core.conclusion)
            assigned = dict(zip(prog.targets, prog.terms))
            terms = tuple(assigned.get(x, Var(x)) for x in self.frame)
            d = self.discharge(fact, terms, _conj_spine(fact.m, len(self.frame)))
            w1 = Deriv("imp-r", Sequent((), (g1,)), (d,), principal=g1)
            w2 = Deriv("imp-r", Sequent((), (g2,)), (_ax(post),), principal=g2)
            return H.consequence(pre, core, post, (w1, w2))
        if isinstance(prog, Test):
            goal = H.test_goal(H.Pca(pre, prog, post))
            if not isinstance(fact.m, And):
                raise ExtractionError("test translation is not a conjunction")
            d = invert_and_l(fact.deriv, fact.m)
            fact = replace(fact, deriv=d, m=fact.m.right)
            d = self.discharge(fact, tuple(Var(x) for x in self.frame),
                               _conj_spine(fact.m, len(self.frame)))
            both = goal.left
            d = Deriv("and-l", _S((both,), (post,)), (d,), principal=both)
            return H.test(pre, prog.cond, post, Deriv("imp-r", Sequent((), (goal,)), (d,), principal=goal))
        if isinstance(prog, Seq):
            return self.seq(prog, pre, post, fact)
        if isinstance(prog, Union):
            if not isinstance(fact.m, Or):
                raise ExtractionError("union translation is not a disjunction")
            d1, d2 = invert_or_l(fact.deriv, fact.m)
            f1 = _Fact(d1, fact.ins, fact.outs, fact.pre, fact.m.left)
            f2 = _Fact(d2, fact.ins, fact.outs, fact.pre, fact.m.right)
            return H.union(self.build(prog.left, pre, post, f1), self.build(prog.right, pre, post, f2))
        if isinstance(prog, Star):
            return self.star(prog, pre, post, fact)
        raise ExtractionError(f"unknown program {prog!r}")

    def seq(self, prog, pre, post, fact: _Fact):
        from . import hoare as H
        d, f = fact.deriv, fact.m
        self.fresh_in(d)
        ms = self.vec("m")
        for name in ms:
            if not isinstance(f, Exists):
                raise ExtractionError("composition translation lacks its existential prefix")
            d = invert_ex_l(d, f, name, self.namer)
            f = substitute_terms(f.body, {f.var: Var(name)})
        if not isinstance(f, And):
            raise ExtractionError("composition translation is not a conjunction")
        d = invert_and_l(d, f)
        mb, mg = f.left, f.right
        lk = {alpha_key(fact.pre), alpha_key(mb)}
        c = d.conclusion
        part = Partition(Sequent(tuple(g for g in c.ante if alpha_key(g) in lk), ()),
                         Sequent(tuple(g for g in c.ante if alpha_key(g) not in lk), c.succ))
        chi = interpolate(d, part, self.theory, self.depth)
        mid = substitute_terms(chi.formula, {m: Var(x) for m, x in zip(ms, self.frame)})
        first = _Fact(chi.left, fact.ins, ms, fact.pre, mb)
        second = _Fact(chi.right, ms, fact.outs, chi.formula, mg)
        return H.compose(self.build(prog.first, pre, mid, first),
                         self.build(prog.second, mid, post, second))

    def star(self, prog, pre, post, fact: _Fact):
        """Invariant: every state the loop can reach from here satisfies ``post``."""
        from . import hoare as H
        from .syntax import forall_many
        self.fresh_in(fact.deriv)
        ws = self.vec("w")
        chi = forall_many(ws, Implies(self.M(prog, self.frame, ws), self.at(post, ws)))
        entry = self.entry_proof(pre, chi, ws, fact)
        leave = self.exit_proof(chi, post)
        qs = self.vec("q")
        body = self.build(prog.body, chi, chi, self.step_fact(chi, prog.body, qs))
        return H.consequence(pre, H.iterate(body), post, (entry, leave))

    def entry_proof(self, pre, chi, ws, fact: _Fact) -> Deriv:
        """``|- pre -> chi`` from the loop's fact."""
        d = fact.deriv
        for old, new in zip(fact.ins + fact.outs, self.frame + ws):
            if old != new:
                self.fresh_in(d)
                d = _free_name(d, new, self.namer)
                d = _rename_deriv(d, Var(old), Var(new))
        levels, g = [], chi
        for _ in ws:
            levels.append(g)
            g = g.body
        out = Deriv("imp-r", _S((pre,), (g,)), (d,), principal=g)
        for lv in reversed(levels):
            out = Deriv("all-r", _S((pre,), (lv,)), (out,), principal=lv, eigen=lv.var)
        goal = Implies(pre, chi)
        return Deriv("imp-r", Sequent((), (goal,)), (out,), principal=goal)

    def exit_proof(self, chi, post) -> Deriv:
        """``|- chi -> post``: run the loop zero times."""
        ante, h, chain = [chi], chi, []
        for x in self.frame:
            chain.append((tuple(ante), h, Var(x)))
            h = substitute_terms(h.body, {h.var: Var(x)})
            ante.append(h)
        ante = tuple(ante)
        mxx = self.conj_proof(ante, h.left, self.refl_item)
        out = Deriv("imp-l", _S(ante, (post,)), (mxx, Deriv("axiom", _S((h.right,), (post,)), principal=post)),
                    principal=h)
        for a, g, t in reversed(chain):
            out = Deriv("all-l", _S(a, (post,)), (out,), principal=g, term=t)
        goal = Implies(chi, post)
        return Deriv("imp-r", Sequent((), (goal,)), (out,), principal=goal)

    def conj_proof(self, ante, target, item):
        """Prove the Xi-conjunction ``target`` one conjunct at a time."""
        from .syntax import TRUE
        n = len(self.ex.xi)
        if n == 0:
            return Deriv("top-r", _S(ante, (TRUE,)), principal=TRUE)
        if n == 1:
            return item(ante, target, 0)
        proofs, g = [], target
        for i in range(n - 1):
            proofs.append((g, item(ante, g.left, i)))
            g = g.right
        out = item(ante, g, n - 1)
        for h, p in reversed(proofs):
            out = Deriv("and-r", _S(ante, (h,)), (p, out), principal=h)
        return out

    def open_item(self, ante, t):
        """``all-r`` on the side variables and ``imp-r``/``and-l``: returns (wrap, ante', cl, src, dst)."""
        chain, g = [], t
        while isinstance(g, ForAll):
            e = g.var if g.var not in _free_of(ante + (g,)) else self.namer.name(g.var)
            chain.append((g, e))
            g = substitute_terms(g.body, {g.var: Var(e)})
        cl, src, dst = g.left.left, g.left.right, g.right
        a1 = tuple(ante) + (g.left,)
        a2 = a1 + (cl, src)

        def wrap(inner):
            out = Deriv("and-l", _S(a1, (dst,)), (inner,), principal=g.left)
            out = Deriv("imp-r", _S(ante, (g,)), (out,), principal=g)
            for h, e in reversed(chain):
                out = Deriv("all-r", _S(ante, (h,)), (out,), principal=h, eigen=e)
            return out
        return wrap, a2, cl, src, dst, [e for _, e in chain]

    def refl_item(self, ante, t, i):
        wrap, a2, cl, src, dst, _ = self.open_item(ante, t)
        return wrap(Deriv("axiom", _S(a2, (dst,)), principal=dst))

    def step_fact(self, chi, body, qs) -> _Fact:
        """``chi, M_body[x, q] |- chi[q]``: one more iteration keeps every reachable state good."""
        x = self.frame
        chi_q = self.at(chi, qs)
        mb = self.M(body, x, qs)
        ante0 = (chi, mb)
        levels, g = [], chi_q
        for _ in x:
            levels.append(g)
            g = g.body
        ws = [lv.var for lv in levels]
        imp = g
        goal = imp.right
        a = list(ante0) + [imp.left]
        chain, h = [], chi
        for w in ws:
            chain.append((tuple(a), h, Var(w)))
            h = substitute_terms(h.body, {h.var: Var(w)})
            a.append(h)
        a3, wrap_q, items = self.split_conj(tuple(a), imp.left, goal)
        reach = self.conj_proof(a3, h.left, lambda an, t, i: self.step_item(an, t, items[i], mb, qs))
        out = Deriv("imp-l", _S(a3, (goal,)),
                    (reach, Deriv("axiom", _S((h.right,), (goal,)), principal=goal)), principal=h)
        out = wrap_q(out)
        for an, g2, t in reversed(chain):
            out = Deriv("all-l", _S(an, (goal,)), (out,), principal=g2, term=t)
        out = Deriv("imp-r", _S(ante0, (imp,)), (out,), principal=imp)
        for lv in reversed(levels):
            out = Deriv("all-r", _S(ante0, (lv,)), (out,), principal=lv, eigen=lv.var)
        return _Fact(out, x, tuple(qs), chi, mb)

    def split_conj(self, ante, f, goal):
        """``and-l`` a Xi-conjunction into its conjuncts."""
        n = len(self.ex.xi)
        a, steps, items, g = list(ante), [], [], f
        for _ in range(max(n - 1, 0)):
            steps.append((tuple(a), g))
            a += [g.left, g.right]
            items.append(g.left)
            g = g.right
        items.append(g)

        def wrap(inner):
            for an, h in reversed(steps):
                inner = Deriv("and-l", _S(an, (goal,)), (inner,), principal=h)
            return inner
        return tuple(a), wrap, items

    def step_item(self, ante, t, src_item, mb, qs):
        """One conjunct: from ``xi(x)`` and the closure reach ``xi(q)``, then ``xi(w)`` from state ``q``."""
        wrap, a2, cl, src, dst, eigens = self.open_item(ante, t)
        a, chain, s = list(a2), [], src_item
        for e in eigens:
            chain.append((tuple(a), s, Var(e)))
            s = substitute_terms(s.body, {s.var: Var(e)})
            a.append(s)
        a3 = tuple(a)
        xq = s.left.right
        c, a4, chain2 = cl, list(a3), []
        for v in self.frame + tuple(qs):
            chain2.append((tuple(a4), c, Var(v)))
            c = substitute_terms(c.body, {c.var: Var(v)})
            a4.append(c)
        a4 = tuple(a4)
        both = Deriv("and-r", _S(a4, (c.left,)),
                     (Deriv("axiom", _S(a4, (c.left.left,)), principal=c.left.left),
                      Deriv("axiom", _S(a4, (c.left.right,)), principal=c.left.right)), principal=c.left)
        reach_q = Deriv("imp-l", _S(a4, (xq,)),
                        (both, Deriv("axiom", _S((c.right,), (xq,)), principal=xq)), principal=c)
        for an, g, tm in reversed(chain2):
            reach_q = Deriv("all-l", _S(an, (xq,)), (reach_q,), principal=g, term=tm)
        pre_q = Deriv("and-r", _S(a3, (s.left,)),
                      (Deriv("axiom", _S(a3, (s.left.left,)), principal=s.left.left), reach_q),
                      principal=s.left)
        out = Deriv("imp-l", _S(a3, (dst,)),
                    (pre_q, Deriv("axiom", _S((s.right,), (dst,)), principal=dst)), principal=s)
        for an, g, tm in reversed(chain):
            out = Deriv("all-l", _S(an, (dst,)), (out,), principal=g, term=tm)
        return wrap(out)


def _free_of(fs) -> set:
    from .syntax import free_vars
    out = set()
    for f in fs:
        out |= free_vars(f)
    return out


def extract_hoare(d: Deriv, pca, theory=None, depth: int = 6):
    """A Hoare derivation of ``pca`` from a cut-free derivation of its translation."""
    from .sequent import CLASSICAL, FLPLUS, RuleSet, as_theory, check_derivation, collect_eigen_predicates
    from .translate import all_names, pca_parts
    theory = as_theory(theory)
    v = check_derivation(d, RuleSet(FLPLUS, CLASSICAL, False), theory)
    if not v:
        raise ExtractionError(f"derivation rejected: {v}")
    parts = pca_parts(pca)
    c = d.conclusion
    if c.ante or len(c.succ) != 1 or not alpha_eq(c.succ[0], parts.formula):
        raise ExtractionError("derivation does not end in the translated pca")
    xi = collect_eigen_predicates(d)
    e = expand_derivation(d, xi)
    avoid = _names(e) | all_names(pca)
    for ax in theory:
        avoid |= all_names(ax)
    for entry in xi:
        avoid |= all_names(entry.pred.body) | set(entry.pred.params)
    x = _Extractor(pca, xi, theory, depth, avoid)
    f = e.conclusion.succ[0]
    for _ in parts.frame + parts.outputs + parts.side:
        e = invert_all_r(e, f, f.var, x.namer)
        f = f.body
    e = invert_imp_r(e, f)
    e = invert_and_l(e, f.left)
    fact = _Fact(e, parts.frame, parts.outputs, f.left.left, f.left.right)
    return x.build(pca.prog, pca.pre, pca.post, fact)
