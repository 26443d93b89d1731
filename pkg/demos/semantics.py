"""Run a loop on a two-element structure and compare with its relational formula.

    python demos/semantics.py
"""
from pathlib import Path

from hoarefl.formats import load_structure
from hoarefl.model import eval_formula, run_program
from hoarefl.text import parse_program, print_formula
from hoarefl.translate import translate_program

CORPUS = Path(__file__).resolve().parents[1] / "corpus"

S = load_structure(CORPUS / "two_cycle.json")        # f swaps 0 and 1, c = 0, Q = {0}
prog = parse_program("(?~Q(x) ; x := f(x))*")
tr = translate_program(prog, ("x",))
print("program:", "(?~Q(x) ; x := f(x))*")
print("formula:", print_formula(tr.formula))
print()
for a in range(S.size):
    runs = sorted(e["x"] for e in run_program(S, {"x": a}, prog))
    by_formula = [b for b in range(S.size)
                  if eval_formula(S, {"x": a, tr.outputs[0]: b}, {}, tr.formula)]
    print(f"from x={a}: execution reaches {runs}, formula relates {by_formula}")
