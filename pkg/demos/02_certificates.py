"""Finite-horizon certificates: recurrence of powers and failure of ergodicity.

Each certificate is a CertificateReport with exact rational rows; the
verdict vocabulary distinguishes a proof at the horizon from mere absence
of evidence.
"""

import warnings
from fractions import Fraction

from rankone import analysis, gallery
from rankone.core import CapsMakeConstructionUnfaithful

warnings.simplefilter("ignore", CapsMakeConstructionUnfaithful)


def show(rep, max_rows=6):
    print(f"  kind={rep.kind} verdict={rep.verdict}")
    for row in rep.rows[:max_rows]:
        print("   ", {k: str(v) for k, v in row.items()})
    if len(rep.rows) > max_rows:
        print(f"    ... {len(rep.rows) - max_rows} more rows")
    print("  summary:", {k: str(v) for k, v in rep.summary.items()})


flagship = gallery.main_wde()

print("== sufficient condition: the square of the flagship map recurs ==")
rep = analysis.conservativity_sufficient(flagship, 2, 40, Fraction(1, 1000))
show(rep)
print()

# Cut counts doubling every stage, spacer offsets growing fast enough to
# separate every stage: the escape product stays at 1/2 forever.
z = (3, 13, 110, 1626, 50132, 3191142, 408388556, 104552444694,
     53531662608812, 54816632339894742)
doubling = gallery.high_staircase(tuple(2 ** (n + 1) for n in range(10)), z)

print("== fast doubling tower: the same product refuses to die ==")
show(analysis.nonconservativity_check(doubling, 2, 10))
print()

print("== pair realignment: the flagship map is not ergodic ==")
rep = analysis.nonergodicity_certificate(flagship, 1, 3)
show(rep)
print()
print("Every stage keeps the realigned-pair fraction at or below 1/2,")
print("so the offset-by-1 copy of the column algebra never mixes in.")
