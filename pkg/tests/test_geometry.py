import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from obbfuse.errors import DegenerateQuad
from obbfuse.geometry import (
    ConvexPolygon,
    QuadPolygon,
    RotatedBox,
    convex_intersection,
    normalize_angle,
    polygon_area,
    quad_from_rbox,
    rbox_from_quad,
    rotated_iou,
)

from conftest import overlapping_pair, random_box
from oracles import mc_polygon_area, mc_rotated_iou, min_rect_by_sweep


def boxes_equivalent(a: RotatedBox, b: RotatedBox, tol: float = 1e-6) -> bool:
    """Equality up to the rectangle symmetry: angle mod pi, with w/h swap
    allowed when the angles differ by an odd multiple of pi/2."""
    if abs(a.cx - b.cx) > tol or abs(a.cy - b.cy) > tol:
        return False
    direct = abs(a.w - b.w) <= tol and abs(a.h - b.h) <= tol and abs(normalize_angle(a.angle - b.angle)) <= tol
    swapped = (
        abs(a.w - b.h) <= tol
        and abs(a.h - b.w) <= tol
        and abs(normalize_angle(a.angle - b.angle - math.pi / 2)) <= tol
    )
    return direct or swapped


class TestRotatedBox:
    def test_angle_normalized_at_construction(self):
        assert RotatedBox(0, 0, 1, 1, math.pi / 2).angle == -math.pi / 2
        assert RotatedBox(0, 0, 1, 1, math.pi).angle == pytest.approx(0, abs=1e-15)
        assert RotatedBox(0, 0, 1, 1, -math.pi / 2).angle == -math.pi / 2
        assert -math.pi / 2 <= RotatedBox(0, 0, 1, 1, 123.456).angle < math.pi / 2

    @pytest.mark.parametrize("w,h", [(0, 1), (1, 0), (-2, 1), (1, -2)])
    def test_rejects_nonpositive_sides(self, w, h):
        with pytest.raises(ValueError):
            RotatedBox(0, 0, w, h, 0)

    def test_rejects_nonfinite(self):
        with pytest.raises(ValueError):
            RotatedBox(math.nan, 0, 1, 1, 0)
        with pytest.raises(ValueError):
            RotatedBox(0, 0, 1, 1, math.inf)


class TestQuadFromRbox:
    def test_axis_aligned_unit_case(self):
        quad = quad_from_rbox(RotatedBox(0, 0, 2, 2, 0))
        assert set(quad.vertices) == {(-1, -1), (1, -1), (1, 1), (-1, 1)}

    def test_quarter_turn_square_has_same_vertex_set(self):
        base = quad_from_rbox(RotatedBox(0, 0, 2, 2, 0))
        turned = quad_from_rbox(RotatedBox(0, 0, 2, 2, math.pi / 2))
        rounded = lambda q: {(round(x, 12), round(y, 12)) for x, y in q.vertices}
        assert rounded(base) == rounded(turned)

    def test_rotation_matrix_oracle(self):
        # corners of (1, 1, 4, 2, pi/4) are R(pi/4) @ (+-2, +-1) + (1, 1)
        c, s = math.cos(math.pi / 4), math.sin(math.pi / 4)
        expected = sorted((1 + x * c - y * s, 1 + x * s + y * c) for x, y in [(-2, -1), (2, -1), (2, 1), (-2, 1)])
        got = sorted(quad_from_rbox(RotatedBox(1, 1, 4, 2, math.pi / 4)).vertices)
        assert np.allclose(got, expected, atol=1e-12)

    def test_output_is_counterclockwise(self, rng):
        for _ in range(50):
            quad = quad_from_rbox(random_box(rng))
            assert polygon_area(quad) > 0


class TestRboxFromQuad:
    def test_unit_square_round_trip_is_literal(self):
        box = rbox_from_quad(quad_from_rbox(RotatedBox(0, 0, 2, 2, 0)))
        assert (box.cx, box.cy, box.w, box.h, box.angle) == (0, 0, 2, 2, 0)

    def test_rect_round_trip_literal(self):
        box = rbox_from_quad(quad_from_rbox(RotatedBox(5, 5, 4, 2, math.pi / 6)))
        assert abs(box.cx - 5) < 1e-6 and abs(box.cy - 5) < 1e-6
        assert abs(box.w - 4) < 1e-6 and abs(box.h - 2) < 1e-6
        assert abs(box.angle - math.pi / 6) < 1e-6

    def test_round_trip_equivalence_random(self, rng):
        for _ in range(200):
            original = random_box(rng)
            back = rbox_from_quad(quad_from_rbox(original))
            assert boxes_equivalent(original, back), (original, back)

    def test_non_rectangular_quad_against_sweep_oracle(self):
        quad = QuadPolygon(((0, 0), (4, 0), (5, 2), (1, 2)))
        box = rbox_from_quad(quad)
        assert box.w * box.h <= min_rect_by_sweep(quad.vertices) + 1e-6
        # the result must still contain every input vertex
        c, s = math.cos(box.angle), math.sin(box.angle)
        for x, y in quad.vertices:
            rx = (x - box.cx) * c + (y - box.cy) * s
            ry = -(x - box.cx) * s + (y - box.cy) * c
            assert abs(rx) <= box.w / 2 + 1e-9 and abs(ry) <= box.h / 2 + 1e-9

    def test_random_quads_against_sweep_oracle(self, rng):
        done = 0
        while done < 25:
            pts = rng.uniform(0, 50, (4, 2))
            try:
                quad = QuadPolygon(tuple(map(tuple, pts)))
            except DegenerateQuad:
                continue
            box = rbox_from_quad(quad)
            assert box.w * box.h <= min_rect_by_sweep(quad.vertices, 7200) * (1 + 1e-6)
            done += 1

    def test_degenerate_quad_rejected(self):
        with pytest.raises(DegenerateQuad):
            QuadPolygon(((0, 0), (1, 0), (2, 0), (3, 0)))
        with pytest.raises(DegenerateQuad):
            QuadPolygon(((0, 0), (0, 0), (1, 1), (0, 1)))


class TestConvexIntersection:
    def test_self_intersection_has_own_area(self):
        quad = quad_from_rbox(RotatedBox(3, -2, 5, 3, 0.4))
        inter = convex_intersection(quad, quad)
        assert inter is not None
        assert polygon_area(inter) == polygon_area(quad)

    def test_disjoint_is_empty(self):
        a = quad_from_rbox(RotatedBox(0, 0, 1, 1, 0))
        b = quad_from_rbox(RotatedBox(10, 10, 1, 1, 0))
        assert convex_intersection(a, b) is None

    def test_half_overlapping_unit_squares(self):
        a = quad_from_rbox(RotatedBox(0, 0, 1, 1, 0))
        b = quad_from_rbox(RotatedBox(0.5, 0, 1, 1, 0))
        inter = convex_intersection(a, b)
        assert inter is not None
        assert polygon_area(inter) == pytest.approx(0.5, abs=1e-12)

    def test_shared_edge_counts_as_empty(self):
        a = quad_from_rbox(RotatedBox(0, 0, 2, 2, 0))
        b = quad_from_rbox(RotatedBox(2, 0, 2, 2, 0))
        assert convex_intersection(a, b) is None

    def test_area_never_exceeds_either_input(self, rng):
        for _ in range(200):
            a, b = overlapping_pair(rng)
            qa, qb = quad_from_rbox(a), quad_from_rbox(b)
            inter = convex_intersection(qa, qb)
            if inter is not None:
                assert polygon_area(inter) <= min(polygon_area(qa), polygon_area(qb)) + 1e-9

    def test_contained_quad_returned_verbatim(self):
        outer = quad_from_rbox(RotatedBox(0, 0, 10, 10, 0))
        inner = quad_from_rbox(RotatedBox(0, 0, 2, 2, 0.3))
        inter = convex_intersection(inner, outer)
        assert inter is not None
        assert polygon_area(inter) == polygon_area(inner)

    def test_at_most_eight_vertices(self, rng):
        for _ in range(200):
            a, b = overlapping_pair(rng)
            inter = convex_intersection(quad_from_rbox(a), quad_from_rbox(b))
            if inter is not None:
                assert 3 <= len(inter.vertices) <= 8


class TestPolygonArea:
    def test_unit_square(self):
        assert polygon_area(quad_from_rbox(RotatedBox(0.5, 0.5, 1, 1, 0))) == 1.0

    def test_triangle(self):
        assert polygon_area(ConvexPolygon(((0, 0), (2, 0), (0, 2)))) == 2.0

    def test_random_pentagon_against_monte_carlo(self, rng):
        # convex pentagon from angularly sorted points on a wobbled circle
        angles = np.sort(rng.uniform(0, 2 * np.pi, 5))
        radii = rng.uniform(3, 5, 5)
        verts = tuple((r * math.cos(a), r * math.sin(a)) for r, a in zip(radii, angles))
        pent = ConvexPolygon(verts)
        estimate = mc_polygon_area(pent.vertices, rng)
        assert polygon_area(pent) == pytest.approx(estimate, rel=0.005)


class TestRotatedIoU:
    def test_identical_boxes_exactly_one(self, rng):
        for _ in range(50):
            box = random_box(rng)
            assert rotated_iou(box, box) == 1.0

    def test_shifted_rect_analytic(self):
        assert rotated_iou(RotatedBox(0, 0, 4, 2, 0), RotatedBox(1, 0, 4, 2, 0)) == pytest.approx(0.6, abs=1e-9)

    def test_perpendicular_rects_analytic(self):
        a = RotatedBox(0, 0, 4, 2, 0)
        b = RotatedBox(0, 0, 4, 2, math.pi / 2)
        assert rotated_iou(a, b) == pytest.approx(1 / 3, abs=1e-9)

    def test_symmetric(self, rng):
        for _ in range(100):
            a, b = overlapping_pair(rng)
            assert abs(rotated_iou(a, b) - rotated_iou(b, a)) < 1e-12

    def test_bounded(self, rng):
        for _ in range(200):
            a, b = overlapping_pair(rng)
            assert 0.0 <= rotated_iou(a, b) <= 1.0

    def test_rigid_motion_invariance(self, rng):
        for _ in range(50):
            a, b = overlapping_pair(rng, size_lo=2.0, size_hi=30.0)
            base = rotated_iou(a, b)
            ang = rng.uniform(-math.pi, math.pi)
            tx, ty = rng.uniform(-50, 50, 2)
            c, s = math.cos(ang), math.sin(ang)

            def moved(box):
                return RotatedBox(
                    cx=box.cx * c - box.cy * s + tx,
                    cy=box.cx * s + box.cy * c + ty,
                    w=box.w,
                    h=box.h,
                    angle=box.angle + ang,
                )

            assert abs(rotated_iou(moved(a), moved(b)) - base) < 1e-9

    def test_against_monte_carlo_oracle(self, rng):
        # the full 1000-pair sweep runs in the acceptance suite
        for _ in range(60):
            a, b = overlapping_pair(rng)
            assert rotated_iou(a, b) == pytest.approx(mc_rotated_iou(a, b, rng, samples=250_000), abs=2e-3)


finite = st.floats(allow_nan=False, allow_infinity=False)


@given(
    cx=st.floats(-1e3, 1e3), cy=st.floats(-1e3, 1e3),
    w=st.floats(0.5, 200), h=st.floats(0.5, 200),
    angle=st.floats(-10, 10),
)
@settings(max_examples=150, deadline=None)
def test_iou_identity_and_bounds_property(cx, cy, w, h, angle):
    box = RotatedBox(cx, cy, w, h, angle)
    assert -math.pi / 2 <= box.angle < math.pi / 2
    assert rotated_iou(box, box) == 1.0
    other = RotatedBox(cx + w / 4, cy, w, h, angle)
    iou = rotated_iou(box, other)
    assert 0.0 <= iou <= 1.0
    assert abs(iou - rotated_iou(other, box)) < 1e-12
