"""Regenerate the bundled Hoare derivations (``python corpus/generate.py``)."""
from pathlib import Path

from hoarefl.formats import dump_json, hoare_to_json
from hoarefl.hoare import (
    assignment, compose, consequence, derive_while, iterate, test, union,
)
from hoarefl.syntax import TRUE
from hoarefl.text import parse_formula as F, parse_program as P, print_pca

HERE = Path(__file__).parent


def assign():
    return assignment(P("x := f(x)"), F("x = c"))


def test_only():
    return test(TRUE, F("x = c"), F("x = c"))


def comp():
    second = assignment(P("y := f(x)"), F("y = f(c)"))
    first = assignment(P("x := c"), second.conclusion.pre)
    return consequence(TRUE, compose(first, second), F("y = f(c)"))


def union_():
    left = consequence(TRUE, assignment(P("x := c"), F("x = c")), F("x = c"))
    return union(left, test(TRUE, F("x = c"), F("x = c")))


def loop1():
    body = assignment(P("x := f(x)"), TRUE)
    loop = derive_while(TRUE, F("~x = c"), body)
    return consequence(TRUE, loop, F("x = c"))


def nested():
    inner_step = compose(test(F("Q(y)"), F("Q(f(y))"), F("Q(f(y))")),
                         assignment(P("y := f(y)"), F("Q(y)")))
    inner = iterate(inner_step)
    enter = assignment(P("y := x"), F("Q(y)"))
    leave = assignment(P("x := y"), F("Q(x)"))
    return iterate(compose(compose(enter, inner), leave))


def monoid_loop():
    inv = F("r = m(x, y)")
    grow_y = assignment(P("y := m(y, a)"), inv)
    grow_r = assignment(P("r := m(r, a)"), grow_y.conclusion.pre)
    step = consequence(inv, compose(grow_r, grow_y), inv)
    return consequence(F("r = x & y = e"), iterate(step), inv)


ENTRIES = {
    "assign": assign, "test": test_only, "comp": comp, "union": union_,
    "loop1": loop1, "nested": nested, "monoid_loop": monoid_loop,
}


def main():
    for name, make in ENTRIES.items():
        d = make()
        dump_json(hoare_to_json(d), HERE / f"{name}.hl")
        (HERE / f"{name}.pca").write_text(print_pca(d.conclusion) + "\n")


if __name__ == "__main__":
    main()
