"""Reading and writing derivations, pcas, theories and structures."""
from __future__ import annotations

import json
from pathlib import Path

from .hoare import Auto, HoareDerivation, SideWitness
from .model import Structure
from .sequent import Deriv, Theory
from .text import (
    parse_formula, parse_pca, parse_predicate, parse_sequent, parse_term, print_formula,
    print_pca, print_predicate, print_sequent, print_term,
)

_OPTIONAL = ("principal", "term", "eigen", "pred", "lhs", "rhs")


# --------------------------------------------------------------------------
# sequent derivations

def deriv_to_json(d: Deriv) -> dict:
    out = {"rule": d.rule, "conclusion": print_sequent(d.conclusion)}
    if d.principal is not None:
        out["principal"] = print_formula(d.principal)
    if d.term is not None:
        out["term"] = print_term(d.term)
    if d.eigen is not None:
        out["eigen"] = d.eigen
    if d.pred is not None:
        out["pred"] = print_predicate(d.pred)
    if d.lhs is not None:
        out["lhs"] = print_term(d.lhs)
        out["rhs"] = print_term(d.rhs)
    if d.premises:
        out["premises"] = [deriv_to_json(p) for p in d.premises]
    return out


def deriv_from_json(doc) -> Deriv:
    if isinstance(doc, str):
        doc = json.loads(doc)
    return Deriv(
        doc["rule"],
        parse_sequent(doc["conclusion"]),
        tuple(deriv_from_json(p) for p in doc.get("premises", ())),
        principal=parse_formula(doc["principal"]) if "principal" in doc else None,
        term=parse_term(doc["term"]) if "term" in doc else None,
        eigen=doc.get("eigen"),
        pred=parse_predicate(doc["pred"]) if "pred" in doc else None,
        lhs=parse_term(doc["lhs"]) if "lhs" in doc else None,
        rhs=parse_term(doc["rhs"]) if "rhs" in doc else None,
    )


# --------------------------------------------------------------------------
# Hoare derivations

def _witness_to_json(w):
    return str(w) if isinstance(w, Auto) else deriv_to_json(w)


def _witness_from_json(w):
    if isinstance(w, str):
        if w == "auto":
            return Auto()
        if w.startswith("auto:"):
            return Auto(int(w[5:]))
        raise ValueError(f"bad side witness {w!r}")
    return deriv_from_json(w)


def hoare_to_json(d: HoareDerivation) -> dict:
    out = {"rule": d.rule, "conclusion": print_pca(d.conclusion)}
    if d.premises:
        out["premises"] = [hoare_to_json(p) for p in d.premises]
    if d.sides:
        out["sides"] = [{"goal": print_formula(s.goal), "witness": _witness_to_json(s.witness)}
                        for s in d.sides]
    return out


def hoare_from_json(doc) -> HoareDerivation:
    """Parse a Hoare derivation; side goals may be omitted and are then taken from the rule."""
    from .hoare import consequence_goals, test_goal
    if isinstance(doc, str):
        doc = json.loads(doc)
    premises = tuple(hoare_from_json(p) for p in doc.get("premises", ()))
    pca = parse_pca(doc["conclusion"])
    rule = doc["rule"]
    raw = doc.get("sides", [])
    defaults = []
    if rule == "Test":
        defaults = [test_goal(pca)]
    elif rule == "Consequence" and premises:
        defaults = list(consequence_goals(pca, premises[0].conclusion))
    sides = []
    for i, s in enumerate(raw):
        if "goal" in s:
            goal = parse_formula(s["goal"])
        elif i < len(defaults):
            goal = defaults[i]
        else:
            raise ValueError(f"{rule} side {i} needs a goal")
        sides.append(SideWitness(goal, _witness_from_json(s.get("witness", "auto"))))
    if not raw and rule in ("Test", "Consequence"):
        sides = [SideWitness(g, Auto()) for g in defaults]
    return HoareDerivation(rule, pca, premises, tuple(sides))


# --------------------------------------------------------------------------
# files

def _read(path) -> str:
    return Path(path).read_text()


def load_pca(path):
    return parse_pca(_read(path))


def load_hoare(path) -> HoareDerivation:
    return hoare_from_json(json.loads(_read(path)))


def load_deriv(path) -> Deriv:
    return deriv_from_json(json.loads(_read(path)))


def load_structure(path) -> Structure:
    return Structure.from_json(json.loads(_read(path)))


def parse_theory(text: str, name: str = "") -> Theory:
    """One closed formula per line; ``#`` starts a comment."""
    axioms = []
    for line in text.splitlines():
        line = line.split("#", 1)[0].strip()
        if line:
            axioms.append(parse_formula(line))
    return Theory(tuple(axioms), name)


def load_theory(path) -> Theory:
    return parse_theory(_read(path), Path(path).stem)


def dump_json(obj, path=None) -> str:
    text = json.dumps(obj, indent=1, ensure_ascii=False) + "\n"
    if path is not None:
        Path(path).write_text(text)
    return text
