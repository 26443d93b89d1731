"""Finite structures, formula evaluation and program runs.

Relational quantifiers range over *all* relations of the right arity
(standard semantics), so evaluation is exponential in |S|^k and refuses
when |S|^k exceeds :data:`MAX_RELATION_SPACE`.
"""
from __future__ import annotations

import itertools
import json
import random
from dataclasses import dataclass, field

from .syntax import (
    And, App, Assign, Bot, Eq, Exists, ForAll, ForAll2, Implies, Or, Rel, RelVar, Seq,
    Star, Test, Top, Union, Var, Vocabulary, free_vars, symbols,
)

MAX_RELATION_SPACE = 16


class EvaluationError(ValueError):
    pass


@dataclass(frozen=True)
class Structure:
    size: int
    functions: dict = field(default_factory=dict)   # name -> (arity, {args tuple: value})
    relations: dict = field(default_factory=dict)   # name -> (arity, frozenset of tuples)

    def __post_init__(self):
        if self.size < 1:
            raise ValueError("universe must be non-empty")
        for name, (k, table) in self.functions.items():
            for args in itertools.product(range(self.size), repeat=k):
                v = table.get(args)
                if v is None:
                    raise ValueError(f"function {name} undefined at {args}")
                if not 0 <= v < self.size:
                    raise ValueError(f"function {name} leaves the universe at {args}")
        for name, (k, tuples) in self.relations.items():
            for t in tuples:
                if len(t) != k or not all(0 <= a < self.size for a in t):
                    raise ValueError(f"bad tuple {t} for relation {name}")

    @property
    def universe(self):
        return range(self.size)

    def vocabulary(self) -> Vocabulary:
        return Vocabulary(tuple((n, k) for n, (k, _) in sorted(self.functions.items())),
                          tuple((n, k) for n, (k, _) in sorted(self.relations.items())))

    def interprets(self, formula) -> bool:
        for kind, name, k in symbols(formula):
            table = self.functions if kind == "f" else self.relations
            if name not in table or table[name][0] != k:
                return False
        return True

    # JSON
    @classmethod
    def from_json(cls, doc):
        if isinstance(doc, str):
            doc = json.loads(doc)
        n = doc["universe"]
        funcs = {}
        for name, spec in doc.get("functions", {}).items():
            k = spec["arity"]
            table = {}
            for key, val in spec["table"].items():
                args = tuple(int(a) for a in key.split(",")) if key != "" else ()
                if len(args) != k:
                    raise ValueError(f"function {name}: key {key!r} does not have arity {k}")
                table[args] = int(val)
            funcs[name] = (k, table)
        rels = {}
        for name, spec in doc.get("relations", {}).items():
            rels[name] = (spec["arity"], frozenset(tuple(t) for t in spec["tuples"]))
        return cls(n, funcs, rels)

    def to_json(self) -> dict:
        return {
            "universe": self.size,
            "functions": {
                name: {"arity": k, "table": {",".join(map(str, a)): v for a, v in sorted(t.items())}}
                for name, (k, t) in sorted(self.functions.items())
            },
            "relations": {
                name: {"arity": k, "tuples": [list(t) for t in sorted(ts)]}
                for name, (k, ts) in sorted(self.relations.items())
            },
        }


def load_structure(path) -> Structure:
    with open(path) as fh:
        return Structure.from_json(json.load(fh))


# --------------------------------------------------------------------------
# evaluation

def eval_term(S: Structure, env, t) -> int:
    if isinstance(t, Var):
        try:
            return env[t.name]
        except KeyError:
            raise EvaluationError(f"valuation undefined at {t.name}") from None
    try:
        k, table = S.functions[t.fn]
    except KeyError:
        raise EvaluationError(f"structure does not interpret {t.fn}") from None
    if k != len(t.args):
        raise EvaluationError(f"{t.fn} has arity {k}")
    return table[tuple(eval_term(S, env, a) for a in t.args)]


def all_relations(S: Structure, k: int):
    """Every subset of |S|^k, as frozensets of tuples."""
    space = list(itertools.product(range(S.size), repeat=k))
    if len(space) > MAX_RELATION_SPACE:
        raise EvaluationError(
            f"relational quantifier over |S|^{k} = {len(space)} tuples exceeds the limit {MAX_RELATION_SPACE}")
    for bits in range(1 << len(space)):
        yield frozenset(t for i, t in enumerate(space) if bits >> i & 1)


def eval_formula(S: Structure, env, H, p) -> bool:
    """Truth of ``p`` in ``S`` under first-order valuation ``env`` and relational valuation ``H``."""
    if isinstance(p, Eq):
        return eval_term(S, env, p.lhs) == eval_term(S, env, p.rhs)
    if isinstance(p, Rel):
        try:
            k, tuples = S.relations[p.name]
        except KeyError:
            raise EvaluationError(f"structure does not interpret {p.name}") from None
        if k != len(p.args):
            raise EvaluationError(f"{p.name} has arity {k}")
        return tuple(eval_term(S, env, a) for a in p.args) in tuples
    if isinstance(p, RelVar):
        try:
            rel = H[p.name]
        except KeyError:
            raise EvaluationError(f"relational valuation undefined at {p.name}") from None
        return tuple(eval_term(S, env, a) for a in p.args) in rel
    if isinstance(p, Top):
        return True
    if isinstance(p, Bot):
        return False
    if isinstance(p, And):
        return eval_formula(S, env, H, p.left) and eval_formula(S, env, H, p.right)
    if isinstance(p, Or):
        return eval_formula(S, env, H, p.left) or eval_formula(S, env, H, p.right)
    if isinstance(p, Implies):
        return not eval_formula(S, env, H, p.left) or eval_formula(S, env, H, p.right)
    if isinstance(p, ForAll):
        inner = dict(env)
        for a in S.universe:
            inner[p.var] = a
            if not eval_formula(S, inner, H, p.body):
                return False
        return True
    if isinstance(p, Exists):
        inner = dict(env)
        for a in S.universe:
            inner[p.var] = a
            if eval_formula(S, inner, H, p.body):
                return True
        return False
    if isinstance(p, ForAll2):
        inner = dict(H)
        for rel in all_relations(S, p.arity):
            inner[p.rel] = rel
            if not eval_formula(S, env, inner, p.body):
                return False
        return True
    raise TypeError(f"not a formula: {p!r}")


def holds(S: Structure, env, p) -> bool:
    return eval_formula(S, env, {}, p)


# --------------------------------------------------------------------------
# programs

def _freeze(env):
    return tuple(sorted(env.items()))


def _step(S, env, prog):
    """Successor valuations of ``env`` under ``prog`` (list of dicts, no duplicates)."""
    if isinstance(prog, Assign):
        values = [eval_term(S, env, t) for t in prog.terms]
        out = dict(env)
        out.update(zip(prog.targets, values))
        return [out]
    if isinstance(prog, Test):
        return [dict(env)] if eval_formula(S, env, {}, prog.cond) else []
    if isinstance(prog, Seq):
        seen, out = set(), []
        for mid in _step(S, env, prog.first):
            for end in _step(S, mid, prog.second):
                key = _freeze(end)
                if key not in seen:
                    seen.add(key)
                    out.append(end)
        return out
    if isinstance(prog, Union):
        seen, out = set(), []
        for end in _step(S, env, prog.left) + _step(S, env, prog.right):
            key = _freeze(end)
            if key not in seen:
                seen.add(key)
                out.append(end)
        return out
    if isinstance(prog, Star):
        seen = {_freeze(env)}
        out = [dict(env)]
        frontier = [env]
        while frontier:
            nxt = []
            for cur in frontier:
                for end in _step(S, cur, prog.body):
                    key = _freeze(end)
                    if key not in seen:
                        seen.add(key)
                        out.append(end)
                        nxt.append(end)
            frontier = nxt
        return out
    raise TypeError(f"not a program: {prog!r}")


def run_program(S: Structure, env, prog) -> list:
    """All valuations reachable from ``env`` by ``prog``, sorted.

    Iteration is the least fixpoint of one-step reachability; it terminates
    because only the program's variables change and the universe is finite.
    """
    missing = free_vars(prog) - set(env)
    if missing:
        raise EvaluationError(f"valuation undefined at {sorted(missing)}")
    return sorted(_step(S, dict(env), prog), key=_freeze)


def pca_holds(S: Structure, env, pca) -> bool:
    needed = free_vars(pca)
    missing = needed - set(env)
    if missing:
        raise EvaluationError(f"valuation undefined at {sorted(missing)}")
    if not eval_formula(S, env, {}, pca.pre):
        return True
    return all(eval_formula(S, out, {}, pca.post) for out in run_program(S, env, pca.prog))


def valuations(S: Structure, names):
    names = list(names)
    for values in itertools.product(range(S.size), repeat=len(names)):
        yield dict(zip(names, values))


def pca_valid_in(S: Structure, pca) -> bool:
    """The pca holds under every valuation of its free variables."""
    return all(pca_holds(S, env, pca) for env in valuations(S, sorted(free_vars(pca))))


def satisfies_theory(S: Structure, theory) -> bool:
    return all(eval_formula(S, {}, {}, th) for th in theory)


# --------------------------------------------------------------------------
# generating structures

def random_structure(vocab: Vocabulary, size: int, rng: random.Random) -> Structure:
    funcs = {}
    for name, k in vocab.functions:
        funcs[name] = (k, {a: rng.randrange(size) for a in itertools.product(range(size), repeat=k)})
    rels = {}
    for name, k in vocab.relations:
        rels[name] = (k, frozenset(a for a in itertools.product(range(size), repeat=k) if rng.random() < 0.5))
    return Structure(size, funcs, rels)


def all_structures(vocab: Vocabulary, max_size: int):
    """Every structure for ``vocab`` with universe size 1..max_size."""
    for n in range(1, max_size + 1):
        f_choices = []
        for name, k in vocab.functions:
            args = list(itertools.product(range(n), repeat=k))
            f_choices.append([(name, k, dict(zip(args, vals)))
                              for vals in itertools.product(range(n), repeat=len(args))])
        r_choices = []
        for name, k in vocab.relations:
            args = list(itertools.product(range(n), repeat=k))
            r_choices.append([(name, k, frozenset(a for i, a in enumerate(args) if bits >> i & 1))
                              for bits in range(1 << len(args))])
        for fs in itertools.product(*f_choices):
            for rs in itertools.product(*r_choices):
                yield Structure(n, {name: (k, t) for name, k, t in fs},
                                {name: (k, t) for name, k, t in rs})


def vocabulary_of(*objs) -> Vocabulary:
    """Smallest vocabulary interpreting every formula/program/pca given."""
    from .syntax import Pca, Sequent
    syms: set = set()

    def add_formula(f):
        syms.update(symbols(f))

    def add_term(t):
        if isinstance(t, App):
            syms.add(("f", t.fn, len(t.args)))
            for a in t.args:
                add_term(a)

    def add_prog(p):
        if isinstance(p, Assign):
            for t in p.terms:
                add_term(t)
        elif isinstance(p, Test):
            add_formula(p.cond)
        elif isinstance(p, Seq):
            add_prog(p.first)
            add_prog(p.second)
        elif isinstance(p, Union):
            add_prog(p.left)
            add_prog(p.right)
        else:
            add_prog(p.body)

    for o in objs:
        if isinstance(o, Pca):
            add_formula(o.pre)
            add_formula(o.post)
            add_prog(o.prog)
        elif isinstance(o, (Assign, Test, Seq, Union, Star)):
            add_prog(o)
        elif isinstance(o, Sequent):
            for f in o.formulas():
                add_formula(f)
        else:
            add_formula(o)
    return Vocabulary(tuple(sorted((n, k) for kind, n, k in syms if kind == "f")),
                      tuple(sorted((n, k) for kind, n, k in syms if kind == "r")))


# --------------------------------------------------------------------------
# batched evaluation: one formula or program over many same-sized structures

class StructureBatch:
    """Structures of one universe size, stacked into arrays along a leading axis."""

    def __init__(self, structures):
        import numpy as np
        self.structures = list(structures)
        if not self.structures:
            raise ValueError("empty batch")
        n = self.size = self.structures[0].size
        if any(S.size != n for S in self.structures):
            raise ValueError("a batch needs one universe size")
        self.count = len(self.structures)
        self.functions, self.relations = {}, {}
        for name, (k, _) in self.structures[0].functions.items():
            arr = np.zeros((self.count,) + (n,) * k, dtype=np.intp)
            for i, S in enumerate(self.structures):
                for args, v in S.functions[name][1].items():
                    arr[(i,) + args] = v
            self.functions[name] = arr
        for name, (k, _) in self.structures[0].relations.items():
            arr = np.zeros((self.count,) + (n,) * k, dtype=bool)
            for i, S in enumerate(self.structures):
                for args in S.relations[name][1]:
                    arr[(i,) + args] = True
            self.relations[name] = arr


def batches(structures) -> list:
    """Group structures by universe size."""
    groups: dict = {}
    for S in structures:
        groups.setdefault(S.size, []).append(S)
    return [StructureBatch(groups[n]) for n in sorted(groups)]


class _Tables:
    """Truth tables over free variables; an entry is ``(names, array)``, the array shaped (B, n, ..., n)."""

    def __init__(self, batch: StructureBatch):
        import numpy as np
        self.np = np
        self.b = batch
        self.n = batch.size
        self.bidx = np.arange(batch.count)
        self.memo: dict = {}
        self.relvars: dict = {}

    def lift(self, entry, names):
        vs, arr = entry
        if vs == names:
            return arr
        np, n = self.np, self.n
        order = [vs.index(u) for u in names if u in vs]
        a = arr.transpose([0] + [1 + i for i in order])
        a = a.reshape((arr.shape[0],) + tuple(n if u in vs else 1 for u in names))
        return np.broadcast_to(a, (arr.shape[0],) + (n,) * len(names))

    def union(self, entries):
        names = []
        for vs, _ in entries:
            names.extend(v for v in vs if v not in names)
        names = tuple(names)
        return names, [self.lift(e, names) for e in entries]

    def index(self, table, args):
        names, arrs = self.union(args)
        b = self.bidx.reshape((-1,) + (1,) * len(names))
        return names, table[(b,) + tuple(arrs)]

    def term(self, t):
        np = self.np
        if isinstance(t, Var):
            return (t.name,), np.broadcast_to(np.arange(self.n), (self.b.count, self.n))
        try:
            table = self.b.functions[t.fn]
        except KeyError:
            raise EvaluationError(f"structure does not interpret {t.fn}") from None
        if table.ndim - 1 != len(t.args):
            raise EvaluationError(f"{t.fn} has arity {table.ndim - 1}")
        return self.index(table, [self.term(a) for a in t.args])

    def const(self, value: bool):
        return (), self.np.full(self.b.count, value)

    def formula(self, p, H):
        key = id(p)
        frv = self.relvars.get(key)
        if frv is None:
            from .syntax import free_relvars
            frv = self.relvars[key] = tuple(sorted(free_relvars(p)))
        mkey = (key,) + tuple(H[r].tobytes() for r in frv if r in H)
        hit = self.memo.get(mkey)
        if hit is None:
            hit = self.memo[mkey] = (self._formula(p, H), p)
        return hit[0]

    def _formula(self, p, H):
        np = self.np
        if isinstance(p, Eq):
            names, (a, b) = self.union([self.term(p.lhs), self.term(p.rhs)])
            return names, a == b
        if isinstance(p, Rel):
            try:
                table = self.b.relations[p.name]
            except KeyError:
                raise EvaluationError(f"structure does not interpret {p.name}") from None
            return self.index(table, [self.term(a) for a in p.args])
        if isinstance(p, RelVar):
            rel = H.get(p.name)
            if rel is None:
                raise EvaluationError(f"relational valuation undefined at {p.name}")
            names, arrs = self.union([self.term(a) for a in p.args])
            return names, rel[tuple(arrs)]
        if isinstance(p, Top):
            return self.const(True)
        if isinstance(p, Bot):
            return self.const(False)
        if isinstance(p, (And, Or, Implies)):
            names, (a, b) = self.union([self.formula(p.left, H), self.formula(p.right, H)])
            if isinstance(p, And):
                return names, a & b
            if isinstance(p, Or):
                return names, a | b
            return names, ~a | b
        if isinstance(p, (ForAll, Exists)):
            vs, arr = self.formula(p.body, H)
            if p.var not in vs:
                return vs, arr
            i = vs.index(p.var)
            red = np.all if isinstance(p, ForAll) else np.any
            return vs[:i] + vs[i + 1:], red(arr, axis=1 + i)
        if isinstance(p, ForAll2):
            space = self.n ** p.arity
            if space > MAX_RELATION_SPACE:
                raise EvaluationError(
                    f"relational quantifier over |S|^{p.arity} = {space} tuples exceeds the limit {MAX_RELATION_SPACE}")
            inner, acc = dict(H), None
            bits = np.arange(space)
            for code in range(1 << space):
                inner[p.rel] = ((code >> bits) & 1).astype(bool).reshape((self.n,) * p.arity)
                entry = self.formula(p.body, inner)
                if acc is None:
                    acc = entry
                else:
                    names, (a, b) = self.union([acc, entry])
                    acc = names, a & b
            return acc
        raise TypeError(f"not a formula: {p!r}")


def formula_table(batch: StructureBatch, p, names):
    """Truth of ``p`` in every structure of ``batch`` under every valuation of ``names``.

    Returns a boolean array shaped (structures, n, ..., n), one axis per name.
    """
    import numpy as np
    names = tuple(names)
    missing = free_vars(p) - set(names)
    if missing:
        raise EvaluationError(f"valuation undefined at {sorted(missing)}")
    t = _Tables(batch)
    return np.ascontiguousarray(t.lift(t.formula(p, {}), names))


def program_table(batch: StructureBatch, prog, frame):
    """Reachability of ``prog`` over ``frame``: array (structures, N, N), N = n**len(frame).

    States are numbered by the frame values read as base-n digits.
    """
    import numpy as np
    frame = tuple(frame)
    missing = free_vars(prog) - set(frame)
    if missing:
        raise EvaluationError(f"frame does not cover {sorted(missing)}")
    t = _Tables(batch)
    n, k, B = batch.size, len(frame), batch.count
    N = n ** k
    weights = [n ** (k - 1 - j) for j in range(k)]
    eye = np.broadcast_to(np.eye(N, dtype=bool), (B, N, N))

    def values(term):
        return t.lift(t.term(term), frame).reshape(B, N)

    def go(p):
        if isinstance(p, Assign):
            assigned = dict(zip(p.targets, p.terms))
            target = sum(w * values(assigned.get(x, Var(x))) for w, x in zip(weights, frame))
            out = np.zeros((B, N, N), dtype=bool)
            out[np.arange(B)[:, None], np.arange(N)[None, :], target] = True
            return out
        if isinstance(p, Test):
            cond = t.lift(t.formula(p.cond, {}), frame).reshape(B, N)
            return eye & cond[:, :, None]
        if isinstance(p, Seq):
            return np.matmul(go(p.first).astype(np.uint8), go(p.second).astype(np.uint8)) > 0
        if isinstance(p, Union):
            return go(p.left) | go(p.right)
        if isinstance(p, Star):
            r = eye | go(p.body)
            while True:
                nxt = np.matmul(r.astype(np.uint16), r.astype(np.uint16)) > 0
                if (nxt == r).all():
                    return r
                r = nxt
        raise TypeError(f"not a program: {p!r}")
    return go(prog)
