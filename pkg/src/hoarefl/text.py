"""Concrete syntax: parsing and printing.

Grammar summary::

    term     x | c | f(t, ..)          bare names matching [a-e][0-9]* are constants
    formula  t = s | P(t, ..) | R:k(t, ..) | true | false | ~A | A & B | A | B | A -> B
             forall x, y. A | exists x. A | forall2 R:k. A
    program  x, y := t, s | ?A | a ; b | a U b | a* | (a)
    pca      {A} a {B}
    predicate \\u1 u2. A
    sequent  A, B |- C, D

``~`` binds tighter than ``&``, then ``|``, then ``->`` (right associative).
``U`` binds tighter than ``;``; both associate to the left; ``*`` is postfix.
Inside ``forall2 R:k.`` the atom ``R(..)`` refers to the bound variable; a
free relational variable is written with its arity, ``R:k(..)``.
"""
from __future__ import annotations

import re

from .syntax import (
    And, App, Assign, Bot, Eq, Exists, FALSE, ForAll, ForAll2, Implies, Not, Or, Pca,
    Predicate, Rel, RelVar, Seq, Sequent, Star, TRUE, Test, Top, Union, Var, is_negation,
)

CONSTANT_NAME = re.compile(r"[a-e][0-9]*\Z")

_TOKEN = re.compile(r"""
    (?P<ws>\s+)
  | (?P<comment>\#[^\n]*)
  | (?P<sym>\|-|⊢|->|→|:=|[(){},.=~&|;*?:\\¬∧∨∪])
  | (?P<num>[0-9]+)
  | (?P<lid>[a-z][a-zA-Z0-9_']*)
  | (?P<uid>[A-Z][a-zA-Z0-9_']*)
""", re.VERBOSE)

_ALIASES = {"⊢": "|-", "→": "->", "¬": "~", "∧": "&", "∨": "|", "∪": "U"}
KEYWORDS = {"forall", "exists", "forall2", "true", "false"}


class ParseError(ValueError):
    def __init__(self, msg, line, col):
        super().__init__(f"{msg} at line {line}, column {col}")
        self.line = line
        self.col = col


def _tokenize(text):
    out = []
    pos, line, col = 0, 1, 1
    while pos < len(text):
        m = _TOKEN.match(text, pos)
        if not m:
            raise ParseError(f"unexpected character {text[pos]!r}", line, col)
        kind = m.lastgroup
        val = m.group()
        if kind not in ("ws", "comment"):
            if kind == "sym":
                val = _ALIASES.get(val, val)
            elif kind == "uid" and val == "U":
                kind, val = "sym", "U"
            out.append((kind, val, line, col))
        nl = val.count("\n") if kind in ("ws", "comment") else 0
        if nl:
            line += nl
            col = len(val) - val.rfind("\n")
        else:
            col += m.end() - m.start()
        pos = m.end()
    out.append(("eof", "", line, col))
    return out


class _Parser:
    def __init__(self, text, constants=None):
        self.toks = _tokenize(text)
        self.i = 0
        self.constants = constants

    # token helpers
    def peek(self, k=0):
        return self.toks[min(self.i + k, len(self.toks) - 1)]

    def at(self, val, k=0):
        t = self.peek(k)
        return t[0] == "sym" and t[1] == val or t[0] == "lid" and t[1] == val and val in KEYWORDS

    def next(self):
        t = self.toks[self.i]
        self.i += 1
        return t

    def fail(self, msg, tok=None):
        tok = tok or self.peek()
        shown = tok[1] or "end of input"
        raise ParseError(f"{msg}, found {shown!r}", tok[2], tok[3])

    def expect(self, val):
        if not self.at(val):
            self.fail(f"expected {val!r}")
        return self.next()

    def expect_kind(self, kind, what):
        t = self.peek()
        if t[0] != kind or t[1] in KEYWORDS:
            self.fail(f"expected {what}")
        return self.next()

    def done(self):
        if self.peek()[0] != "eof":
            self.fail("unexpected trailing input")

    def is_constant(self, name):
        if self.constants is not None and name in self.constants:
            return True
        return bool(CONSTANT_NAME.match(name))

    # terms
    def term(self):
        tok = self.expect_kind("lid", "a term")
        name = tok[1]
        if self.at("("):
            self.next()
            args = []
            if not self.at(")"):
                args.append(self.term())
                while self.at(","):
                    self.next()
                    args.append(self.term())
            self.expect(")")
            return App(name, tuple(args))
        if self.is_constant(name):
            return App(name, ())
        return Var(name)

    def term_list(self):
        self.expect("(")
        args = []
        if not self.at(")"):
            args.append(self.term())
            while self.at(","):
                self.next()
                args.append(self.term())
        self.expect(")")
        return tuple(args)

    # formulas
    def formula(self, rels=()):
        if self.at("forall") or self.at("exists") or self.at("forall2"):
            return self.quant(rels)
        left = self.disj(rels)
        if self.at("->"):
            self.next()
            return Implies(left, self.formula(rels))
        return left

    def quant(self, rels):
        kw = self.next()[1]
        if kw == "forall2":
            name = self.expect_kind("uid", "a relational variable")[1]
            self.expect(":")
            arity = int(self.expect_kind("num", "an arity")[1])
            if arity < 1:
                self.fail("relational variables need arity >= 1")
            self.expect(".")
            return ForAll2(name, arity, self.formula(rels + ((name, arity),)))
        names = [self.expect_kind("lid", "a variable")[1]]
        while self.at(","):
            self.next()
            names.append(self.expect_kind("lid", "a variable")[1])
        self.expect(".")
        body = self.formula(rels)
        cls = ForAll if kw == "forall" else Exists
        for n in reversed(names):
            body = cls(n, body)
        return body

    def disj(self, rels):
        left = self.conj(rels)
        if self.at("|"):
            self.next()
            return Or(left, self.disj(rels))
        return left

    def conj(self, rels):
        left = self.unary(rels)
        if self.at("&"):
            self.next()
            return And(left, self.conj(rels))
        return left

    def unary(self, rels):
        if self.at("~"):
            self.next()
            return Not(self.unary(rels))
        if self.at("forall") or self.at("exists") or self.at("forall2"):
            return self.quant(rels)
        return self.atom(rels)

    def atom(self, rels):
        tok = self.peek()
        if self.at("true"):
            self.next()
            return TRUE
        if self.at("false"):
            self.next()
            return FALSE
        if self.at("("):
            self.next()
            f = self.formula(rels)
            self.expect(")")
            return f
        if tok[0] == "uid":
            self.next()
            name = tok[1]
            if self.at(":"):
                self.next()
                arity = int(self.expect_kind("num", "an arity")[1])
                args = self.term_list()
                if len(args) != arity:
                    self.fail(f"{name}:{arity} applied to {len(args)} arguments", tok)
                return RelVar(name, arity, args)
            bound = dict(rels)
            if name in bound:
                args = self.term_list()
                if len(args) != bound[name]:
                    self.fail(f"{name}:{bound[name]} applied to {len(args)} arguments", tok)
                return RelVar(name, bound[name], args)
            args = self.term_list() if self.at("(") else ()
            return Rel(name, args)
        if tok[0] == "lid" and tok[1] not in KEYWORDS:
            lhs = self.term()
            self.expect("=")
            return Eq(lhs, self.term())
        self.fail("expected a formula")

    # programs
    def program(self):
        left = self.union_prog()
        while self.at(";"):
            self.next()
            left = Seq(left, self.union_prog())
        return left

    def union_prog(self):
        left = self.post_prog()
        while self.at("U"):
            self.next()
            left = Union(left, self.post_prog())
        return left

    def post_prog(self):
        p = self.prim_prog()
        while self.at("*"):
            self.next()
            p = Star(p)
        return p

    def prim_prog(self):
        if self.at("("):
            self.next()
            p = self.program()
            self.expect(")")
            return p
        if self.at("?"):
            tok = self.next()
            cond = self.formula()
            try:
                return Test(cond)
            except ValueError as e:
                self.fail(str(e), tok)
        tok = self.peek()
        targets = [self.expect_kind("lid", "a program")[1]]
        while self.at(","):
            self.next()
            targets.append(self.expect_kind("lid", "a variable")[1])
        self.expect(":=")
        terms = [self.term()]
        while self.at(","):
            self.next()
            terms.append(self.term())
        try:
            return Assign(tuple(targets), tuple(terms))
        except ValueError as e:
            self.fail(str(e), tok)

    def pca(self):
        tok = self.expect("{")
        pre = self.formula()
        self.expect("}")
        prog = self.program()
        self.expect("{")
        post = self.formula()
        self.expect("}")
        try:
            return Pca(pre, prog, post)
        except ValueError as e:
            self.fail(str(e), tok)

    def predicate(self):
        self.expect("\\")
        params = [self.expect_kind("lid", "a parameter")[1]]
        while self.peek()[0] == "lid" and not self.at(".") and self.peek()[1] not in KEYWORDS:
            params.append(self.next()[1])
        self.expect(".")
        return Predicate(tuple(params), self.formula())

    def formula_list(self, stop):
        out = []
        if self.at(stop) or self.peek()[0] == "eof":
            return out
        out.append(self.formula())
        while self.at(","):
            self.next()
            out.append(self.formula())
        return out

    def sequent(self):
        ante = self.formula_list("|-")
        self.expect("|-")
        succ = self.formula_list("eof")
        return Sequent.of(ante, succ)


def _run(method, text, constants=None):
    p = _Parser(text, constants)
    out = getattr(p, method)()
    p.done()
    return out


def parse_term(text, constants=None):
    return _run("term", text, constants)


def parse_formula(text, constants=None):
    return _run("formula", text, constants)


def parse_program(text, constants=None):
    return _run("program", text, constants)


def parse_pca(text, constants=None):
    return _run("pca", text, constants)


def parse_predicate(text, constants=None):
    return _run("predicate", text, constants)


def parse_sequent(text, constants=None):
    return _run("sequent", text, constants)


# --------------------------------------------------------------------------
# printing

def print_term(t) -> str:
    if isinstance(t, Var):
        return t.name
    if not t.args:
        return t.fn if CONSTANT_NAME.match(t.fn) else f"{t.fn}()"
    return f"{t.fn}({', '.join(print_term(a) for a in t.args)})"


def print_formula(p, prec=0, rels=frozenset()) -> str:
    if isinstance(p, Top):
        return "true"
    if isinstance(p, Bot):
        return "false"
    if isinstance(p, Eq):
        return f"{print_term(p.lhs)} = {print_term(p.rhs)}"
    if isinstance(p, Rel):
        if not p.args:
            return p.name
        return f"{p.name}({', '.join(print_term(a) for a in p.args)})"
    if isinstance(p, RelVar):
        args = ", ".join(print_term(a) for a in p.args)
        if p.name in rels:
            return f"{p.name}({args})"
        return f"{p.name}:{p.arity}({args})"
    if is_negation(p):
        return "~" + print_formula(p.left, 4, rels)
    if isinstance(p, Implies):
        s = f"{print_formula(p.left, 2, rels)} -> {print_formula(p.right, 1, rels)}"
        return f"({s})" if prec > 1 else s
    if isinstance(p, Or):
        s = f"{print_formula(p.left, 3, rels)} | {print_formula(p.right, 2, rels)}"
        return f"({s})" if prec > 2 else s
    if isinstance(p, And):
        s = f"{print_formula(p.left, 4, rels)} & {print_formula(p.right, 3, rels)}"
        return f"({s})" if prec > 3 else s
    if isinstance(p, (ForAll, Exists)):
        cls = type(p)
        names = [p.var]
        body = p.body
        while type(body) is cls:
            names.append(body.var)
            body = body.body
        kw = "forall" if cls is ForAll else "exists"
        s = f"{kw} {', '.join(names)}. {print_formula(body, 0, rels)}"
        return f"({s})" if prec > 0 else s
    if isinstance(p, ForAll2):
        s = f"forall2 {p.rel}:{p.arity}. {print_formula(p.body, 0, rels | {p.rel})}"
        return f"({s})" if prec > 0 else s
    raise TypeError(f"not a formula: {p!r}")


def print_program(p, prec=0) -> str:
    if isinstance(p, Assign):
        s = f"{', '.join(p.targets)} := {', '.join(print_term(t) for t in p.terms)}"
        return f"({s})" if prec > 3 else s
    if isinstance(p, Test):
        c = p.cond
        simple = isinstance(c, (Eq, Rel, RelVar, Top, Bot)) or \
            (is_negation(c) and isinstance(c.left, (Eq, Rel, Top, Bot)))
        s = "?" + (print_formula(c) if simple else f"({print_formula(c)})")
        return f"({s})" if prec > 3 else s
    if isinstance(p, Seq):
        s = f"{print_program(p.first, 1)} ; {print_program(p.second, 2)}"
        return f"({s})" if prec > 1 else s
    if isinstance(p, Union):
        s = f"{print_program(p.left, 2)} U {print_program(p.right, 3)}"
        return f"({s})" if prec > 2 else s
    if isinstance(p, Star):
        return print_program(p.body, 4) + "*"
    raise TypeError(f"not a program: {p!r}")


def print_pca(pi) -> str:
    return f"{{{print_formula(pi.pre)}}} {print_program(pi.prog)} {{{print_formula(pi.post)}}}"


def print_predicate(pred) -> str:
    return f"\\{' '.join(pred.params)}. {print_formula(pred.body)}"


def print_sequent(s) -> str:
    ante = ", ".join(print_formula(f, 1) for f in s.ante)
    succ = ", ".join(print_formula(f, 1) for f in s.succ)
    return f"{ante} |- {succ}".strip()


def show(e) -> str:
    """Print any syntactic object."""
    from .syntax import Pca as _Pca, Predicate as _Pred, Sequent as _Seq
    if isinstance(e, (Var, App)):
        return print_term(e)
    if isinstance(e, (Assign, Test, Seq, Union, Star)):
        return print_program(e)
    if isinstance(e, _Pca):
        return print_pca(e)
    if isinstance(e, _Pred):
        return print_predicate(e)
    if isinstance(e, _Seq):
        return print_sequent(e)
    return print_formula(e)
