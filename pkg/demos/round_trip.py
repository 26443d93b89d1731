"""Compile a Hoare proof that needs a theory, then recover a Hoare proof from the result.

    python demos/round_trip.py
"""
from pathlib import Path

from hoarefl.compile import compile_hoare_to_flp
from hoarefl.extract import extract_hoare
from hoarefl.formats import load_hoare, load_theory
from hoarefl.hoare import check_hoare
from hoarefl.text import print_pca

CORPUS = Path(__file__).resolve().parents[1] / "corpus"
T = load_theory(CORPUS / "monoid.fol")
d = load_hoare(CORPUS / "monoid_loop.hl")
print("original:", print_pca(d.conclusion), f"({d.size()} rules)", check_hoare(d, T))

D = compile_hoare_to_flp(d, T)
print(f"compiled to a sequent proof with {D.size()} nodes")

h = extract_hoare(D, d.conclusion, T, 8)
print("extracted:", print_pca(h.conclusion), f"({h.size()} rules)", check_hoare(h, T, 8))
for rule in ("Iteration", "Composition", "Assignment", "Consequence"):
    print(f"  {rule}: {h.count(rule)}")
