"""Every exact routine has an independent check; this script runs a few.

The oracles do things the slow, literal way: unfolding towers level by
level, enumerating tuples, sampling points.  Agreement is the point.
"""

from fractions import Fraction

from rankone import analysis, gallery, oracle, tower
from rankone.core import descendant_set, explicit_spec

spec = explicit_spec([(3, (0, 1, 2)), (4, (0, 2, 1, 3))], name="mixed")

fast = descendant_set(spec, 0, 2)
slow = oracle.brute_descendants(spec, 0, 2)
print("descendant sets agree:", fast == slow, f"({len(fast)} heights)")

k = 2
exact = analysis.cons_fraction_exact(spec, 0, 2, k)
brute = oracle.brute_tuple_fraction(spec, 0, 2, k)
print(f"returning {k}-tuple fraction: exact {exact}, brute {brute}, equal {exact == brute}")

shared = oracle.brute_shared_coordinate_fraction(spec, 0, 2, k)
print("1 - product bound matches shared-coordinate count:",
      1 - analysis.rho_bound(spec, 0, 2, k) == shared)
print()

# Monte Carlo vs exact measure. The sampler only certifies to ~3 sigma;
# the exact value needs no certification.
stair = gallery.staircase()
B = tower.level_set(stair, 1, (0,))
measured = tower.translate_intersection_measure(stair, B, 4)
est, err = oracle.monte_carlo_measure(stair, B, 4, 50_000, 7)
print(f"overlap at shift 4: exact {measured}, sampled {float(est):.5f} +- {float(err):.5f}")
print()

# Single-stepping the map k times must land where the closed form lands.
p = tower.point(stair, 2, 5, stair.width(2) * Fraction(3, 11))
for k in (-9, -1, 17, 40):
    print(f"orbit check k={k:+d}:", oracle.stepwise_orbit_check(stair, p, k))
print()

# A probe for the moving-overlap property: the smallest positive shift
# that drags one level set across itself and a second one.
A = tower.level_set(stair, 2, (3,))
B = tower.level_set(stair, 2, (7,))
n = analysis.wde_probe(stair, A, B, stair.height(3))
print("first shift moving A over itself and over B:", n)
print("certify it exactly:",
      tower.translate_intersection_measure(stair, A, n) > 0,
      tower.intersection_measure(stair, A, B, n) > 0)
