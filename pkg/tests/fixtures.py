"""Shared hand-checked scenes used across the test suite."""

from viscount.geom_core import Point, rat
from viscount.scene import Scene


def P(x, y):
    return Point(rat(x), rat(y))


# one horizontal segment
T1 = Scene((0, 0, 10, 10), [((2, 5), (8, 5))])

# a second segment shadowing the middle of the first
T2 = Scene((0, 0, 10, 10), [((2, 5), (8, 5)), ((4, 3), (6, 3))])

# five segments; from (-5,-2) the graph of hidden-endpoint projections has
# 5 vertices and 5 edges, one connected component
FIVE = Scene((-14, -4, 1, 12), [
    ((-10, 10), (-2, 10)),
    ((-12, 8), (-9, "8.5")),
    ((-10, 6), (-7, 7)),
    ((-5, 8), (-2, "7.5")),
    ((-6, 6), (-1, "6.5")),
])
FIVE_P = P(-5, -2)

# six segments; from (9,2) the subsegment counts are [2,1,1,2,1,1] with one
# visible box part and three graph components {0,1,5}, {2,3}, {4}
SIX = Scene((0, 0, 20, 20), [
    ((2, 18), (17, 16)),
    ((2, 15), (4, "15.5")),
    ((7, 12), (11, 13)),
    ((10, "12.2"), (13, 12)),
    (("10.5", "11.2"), ("11.5", 11)),
    ((16, 15), (18, 14)),
])
SIX_P = P(9, 2)

# four segments boxing in the center point: no box boundary is visible
PINWHEEL = Scene((0, 0, 10, 10), [
    ((1, "2.8"), (9, 3)),
    (("9.5", 1), ("9.5", 9)),
    ((1, "7.2"), (9, 7)),
    (("0.5", "1.2"), ("0.5", "8.8")),
])
PINWHEEL_P = P(5, 5)

# the far segment is completely hidden behind the near one
HIDDEN = Scene((0, -1, 10, 10), [((4, 4), (6, 4)), (("3.8", 6), ("6.2", 6))])
HIDDEN_P = P(5, 0)
