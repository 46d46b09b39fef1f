# Oriented-rectangle geometry: corner conversion, clipping, rotated IoU.
#
# Run:  python demos/01_rotated_geometry.py

import math

from obbfuse import (
    QuadPolygon,
    RotatedBox,
    convex_intersection,
    polygon_area,
    quad_from_rbox,
    rbox_from_quad,
    rotated_iou,
)

# A box is (cx, cy, w, h, angle). Angles are radians, normalized to [-pi/2, pi/2).
a = RotatedBox(cx=0, cy=0, w=4, h=2, angle=0)
b = RotatedBox(cx=1, cy=0, w=4, h=2, angle=0)
print("a =", a)
print("b =", b)

# Corner form, counterclockwise.
print("corners of a:", quad_from_rbox(a).vertices)

# The analytic overlap of these two is a 3x2 rectangle; union is 8 + 8 - 6.
inter = convex_intersection(quad_from_rbox(a), quad_from_rbox(b))
print("intersection area:", polygon_area(inter))
print("IoU(a, b) =", rotated_iou(a, b), "(analytically 6/10)")

# Crossed rectangles: a 4x2 box against its quarter-turn twin overlaps in a
# 2x2 square, union 12.
c = RotatedBox(0, 0, 4, 2, math.pi / 2)
print("IoU(a, a rotated 90deg) =", rotated_iou(a, c), "(analytically 1/3)")

# Minimum-area enclosing rectangle of an arbitrary convex quad
# (this is how 8-coordinate label lines become boxes).
quad = QuadPolygon(((0, 0), (4, 0), (5, 2), (1, 2)))
print("enclosing box of a parallelogram:", rbox_from_quad(quad))

# Round trip: a rectangle's own quad comes straight back.
original = RotatedBox(5, 5, 4, 2, math.pi / 6)
print("round trip:", rbox_from_quad(quad_from_rbox(original)))
