"""Return-time profiles: partial rigidity, alpha tails, overlap decay."""

import warnings
from fractions import Fraction

from rankone import analysis, gallery, oracle, tower
from rankone.core import CapsMakeConstructionUnfaithful

warnings.simplefilter("ignore", CapsMakeConstructionUnfaithful)

# The q-parameterized family returns (q-1)/q of any set to itself along
# the doubled column heights.
for q in (2, 3, 4):
    spec = gallery.t_q(q, gallery.Caps(max_r=64))
    a, ratio = analysis.rigidity_scan(spec, 2)
    print(f"q={q}: best shift at stage 2 is {a} = 2*h_2, ratio {ratio}")
print()

# The rigid family does better: its even-stage ratios climb toward 1.
rigid = gallery.rigid_wde(gallery.Caps(max_r=64))
print("rigid family ratios:", [str(analysis.rigidity_scan(rigid, n)[1]) for n in (2, 4, 6)])
print()

# Alpha profile: outside finitely many shifts, overlap never exceeds half
# the set's measure.
spec = gallery.t_q(2, gallery.Caps(max_r=6))
B = tower.level_set(spec, 2, (0,))
prof = analysis.alpha_type_profile(spec, B, spec.height(4))
print(f"alpha profile up to k={spec.height(4)}:")
print(f"  exceptions: {prof.exceptions!r}")
print(f"  sup of ratio elsewhere: {prof.sup_outside} (attained at k={prof.sup_outside_at})")
print()

# Overlap decay for the doubling family: between consecutive heights the
# normalized overlap is below 2/n, exactly.
ko = gallery.koopman()
base = tower.level_set(ko, 1, (0,))
rng = oracle.SplitMix64(42)
h3, h4 = ko.height(3), ko.height(4)
ks = sorted(h3 + rng.next_below(h4 - h3) for _ in range(5))
ks.insert(0, 2 * ko.height(1))  # a doubled height, where the overlap is big
rep = analysis.koopman_decay_check(ko, base, ks)
print("overlap decay on sampled shifts:", rep.verdict)
for row in rep.rows:
    print(f"  k={row['k']}: ratio {row['ratio']} < bound {row['bound']}")
print()

gcd, verdict = analysis.divisibility_gcd(ko, 6)
print(f"height-set gcd {gcd} -> {verdict}: a common divisor pins an eigenvalue")
