"""Build a few towers and read off their exact combinatorial data."""

from fractions import Fraction

from rankone import gallery, tower
from rankone.core import descendant_set, explicit_spec, sum_is_direct

# A hand-rolled two-stage tower: cut into 3, put 0/1/2 spacers on the
# subcolumns, twice over.
spec = explicit_spec([(3, (0, 1, 2)), (3, (0, 1, 2))], name="triple")
print("== explicit tower ==")
for n in range(3):
    print(f"stage {n}: h = {spec.height(n)}, width = {spec.width(n)}")
print("height set H_1 =", spec.height_set(1))
print("descendants of the stage-0 base in stage 2:", descendant_set(spec, 0, 2))
print("direct sum:", sum_is_direct([spec.height_set(0), spec.height_set(1)]))
print()

# The classical staircase grows its cut count by one every stage.
stair = gallery.staircase()
print("== staircase ==")
print("heights:", [stair.height(n) for n in range(7)])
print("widths are exact rationals:", [str(stair.width(n)) for n in range(4)])
print()

# Levels are measurable unions of intervals; all measures are Fractions.
B = tower.level_set(stair, 2, (0, 5))
print("two levels of stage 2 have measure", tower.measure(stair, B))
C = tower.refine(stair, B, 4)
print("refined to stage 4:", len(C.heights), "levels, same measure", tower.measure(stair, C))
print()

# Points move level by level; the map is evaluated without any rounding.
p = tower.point(stair, 2, 3, stair.width(2) * Fraction(1, 7))
q = tower.apply_pointwise(stair, p, 25)
print(f"T^25 of (stage 2, level 3) lands at stage {q.stage}, level {q.height}")
print("offsets stay exact:", q.offset)
