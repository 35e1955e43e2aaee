"""Walk through the exact exit-time machinery for the biased walk.

Start with the smallest interesting case, look at the joint law of
(exit step, exit side), confirm the product structure, and finish with an
exact dominance scan across a grid of biases.
"""

from fractions import Fraction

import exitdom as ed
from exitdom.walk import MODE_RATIONAL, WalkSpec

# A walk with p = 3/5 leaving (-2, 2): the full table, exactly.
spec = WalkSpec("3/5", 2)
table = ed.exit_joint(spec, 12, MODE_RATIONAL)
print("n   P(exit up)      P(exit down)    P(still inside)")
for n in range(13):
    print(f"{n:<3} {str(table.up[n]):<15} {str(table.down[n]):<15} "
          f"{str(table.residual[n])}")

# The exit side is independent of the exit step: every row of the joint
# table is the step pmf times the same side split p^k / (p^k + q^k).
h = ed.upper_exit_prob(spec, MODE_RATIONAL)
print(f"\nP(exit at +k) = {h}")
for n in (2, 4, 6):
    assert table.up[n] == table.exit_pmf(n) * h
print("joint row == pmf * side split, exactly, at every step")

# Expected exit time, closed linear-system solve vs the k^2 symmetric case.
print(f"\nE[exit step] at p=3/5, k=2: {ed.mean_exit(spec, MODE_RATIONAL)}")
print(f"E[exit step] at p=1/2, k=5: {ed.mean_exit(WalkSpec('1/2', 5), MODE_RATIONAL)}")

# Dominance: pushing the bias away from 1/2 can only speed the exit up.
ps = [Fraction(1, 2) + Fraction(i, 10) for i in range(5)]
report = ed.dominance_scan_discrete(ps, 3, 120, MODE_RATIONAL)
print()
print(report.to_text())
