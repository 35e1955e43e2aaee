"""Change of measure between walk biases, demonstrated numerically.

The likelihood ratio r^n z^s lets one exit table answer questions about
every other bias: reweight the p=1/2 table to predict the p=0.8 survival
curve, then check the conditional-expectation factorization that drives
the dominance proof.
"""

import exitdom as ed
from exitdom.walk import WalkSpec

P_FROM, P_TO, K = 0.5, 0.8, 3

print(f"survival of the p={P_TO} walk, predicted from the p={P_FROM} table:")
print("n    reweighted        direct            |diff|      tail bound")
for n in (0, 5, 10, 20, 40):
    est, bound = ed.reweighted_survival_walk(P_FROM, P_TO, K, n, 500)
    direct = ed.survival_pmf(WalkSpec(P_TO, K), n).values[n]
    print(f"{n:<4} {est:<17.12f} {direct:<17.12f} {abs(est - direct):.2e}   "
          f"{bound:.2e}")

# The factorization identity behind the dominance theorem:
# Q_{p2}(sigma > n) = E_{p1}[r^sigma; sigma > n] / E_{p1}[r^sigma].
print("\nfactorization deviation across (p1, p2) pairs at n = 10:")
for p1, p2 in [(0.5, 0.6), (0.5, 0.9), (0.6, 0.8), (0.8, 0.9)]:
    dev = ed.factorization_check_discrete(p1, p2, K, 10, 500)
    print(f"  p1={p1}, p2={p2}: {dev:.2e}")

# Why the truncated sums are safe: the per-step ratio r contracts the
# decay rate of the source chain exactly onto the target chain's rate.
from math import sqrt

from exitdom.walk import interior_decay_envelope

p1, p2 = 0.5, 0.8
r = sqrt(p2 * (1 - p2) / (p1 * (1 - p1)))
_, rho1 = interior_decay_envelope(WalkSpec(p1, K))
_, rho2 = interior_decay_envelope(WalkSpec(p2, K))
print(f"\nr * rho(p1) = {r * rho1:.12f} = rho(p2) = {rho2:.12f} < 1")
