"""Find a first-order proof and split it with a Craig interpolant.

    python demos/interpolation.py
"""
from hoarefl.extract import Partition, interpolate
from hoarefl.prover import prove_fo
from hoarefl.text import parse_sequent, print_formula, show

s = parse_sequent("P(c), forall x. P(x) -> Q(f(x)) |- exists y. Q(y) | R(d)")
d = prove_fo(s, 6)
print("proved:", show(d.conclusion), f"({d.size()} nodes)")

# first antecedent formula on the left, everything else on the right
p = Partition.split(s, [0, 1], [])
I = interpolate(d, p)
print("left  side:", show(p.left))
print("right side:", show(p.right))
print("interpolant:", print_formula(I.formula))
print("left witness ends in ", show(I.left.conclusion))
print("right witness ends in", show(I.right.conclusion))
