"""Compile a Hoare proof into a sequent proof, then expand away the relational quantifiers.

    python demos/compile_and_expand.py [name]    (default: loop1)
"""
import sys
from pathlib import Path

from hoarefl.compile import compile_hoare_to_flp
from hoarefl.extract import expand_derivation
from hoarefl.formats import load_hoare
from hoarefl.hoare import check_hoare
from hoarefl.sequent import FL, FLPLUS, RuleSet, check_derivation, collect_eigen_predicates, uses_forall2
from hoarefl.text import print_pca, print_predicate, show

name = sys.argv[1] if len(sys.argv) > 1 else "loop1"
d = load_hoare(Path(__file__).resolve().parents[1] / "corpus" / f"{name}.hl")
print("Hoare proof of", print_pca(d.conclusion), "->", check_hoare(d))

D = compile_hoare_to_flp(d)
print(f"\nsequent proof: {D.size()} nodes, rules {sorted(D.rules_used())}")
print("end-sequent:", show(D.conclusion))
print("checks in FL+:", check_derivation(D, RuleSet(FLPLUS)))

xi = collect_eigen_predicates(D)
print("\ninstantiated predicates:")
for entry in xi:
    side = f"   (closed over {', '.join(entry.side)})" if entry.side else ""
    print("  ", print_predicate(entry.pred) + side)
E = expand_derivation(D, xi)
print(f"\nexpanded proof: {E.size()} nodes, relational quantifiers left: {uses_forall2(E)}")
print("checks in FL:", check_derivation(E, RuleSet(FL)))
