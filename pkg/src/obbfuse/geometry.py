"""Exact convex geometry for oriented rectangles.

Conversions between center/size/angle boxes and corner quadrilaterals,
Sutherland-Hodgman clipping, shoelace areas, and rotated IoU. All
coordinates are 64-bit pixel-scale reals; angles are radians normalized
to [-pi/2, pi/2). Everything here is a pure function on immutable values.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

from .errors import DegenerateQuad

# Pixel-scale inputs never approach these scales.
VERTEX_TOL = 1e-9
AREA_TOL = 1e-6

Point = tuple[float, float]


def normalize_angle(angle: float) -> float:
    """Reduce an angle modulo pi into [-pi/2, pi/2)."""
    a = angle - math.pi * math.floor((angle + math.pi / 2) / math.pi)
    # floor rounding can land exactly on pi/2 for inputs a hair below a period edge
    if a >= math.pi / 2:
        a -= math.pi
    return a


@dataclass(frozen=True)
class RotatedBox:
    """Oriented rectangle: center (cx, cy), size (w, h), rotation angle in radians.

    The angle is normalized at construction; w and h must be positive and all
    fields finite. A rectangle is invariant under angle +- pi, so normalization
    never needs to swap w and h.
    """

    cx: float
    cy: float
    w: float
    h: float
    angle: float = 0.0

    def __post_init__(self):
        for name in ("cx", "cy", "w", "h", "angle"):
            v = getattr(self, name)
            if not math.isfinite(v):
                raise ValueError(f"RotatedBox.{name} must be finite, got {v!r}")
        if self.w <= 0 or self.h <= 0:
            raise ValueError(f"RotatedBox sides must be positive, got w={self.w}, h={self.h}")
        object.__setattr__(self, "angle", normalize_angle(self.angle))


def _shoelace(vertices: tuple[Point, ...]) -> float:
    """Signed area (positive for counterclockwise order)."""
    s = 0.0
    n = len(vertices)
    for i in range(n):
        x1, y1 = vertices[i]
        x2, y2 = vertices[(i + 1) % n]
        s += x1 * y2 - x2 * y1
    return 0.5 * s


def _validate_polygon(vertices: tuple[Point, ...], require_convex: bool) -> tuple[Point, ...]:
    n = len(vertices)
    for x, y in vertices:
        if not (math.isfinite(x) and math.isfinite(y)):
            raise ValueError(f"polygon vertex not finite: ({x!r}, {y!r})")
    for i in range(n):
        for j in range(i + 1, n):
            if abs(vertices[i][0] - vertices[j][0]) <= VERTEX_TOL and abs(vertices[i][1] - vertices[j][1]) <= VERTEX_TOL:
                raise DegenerateQuad(f"vertices {i} and {j} coincide within {VERTEX_TOL}")
    area = _shoelace(vertices)
    if area < 0:
        vertices = tuple(reversed(vertices))
        area = -area
    if area < AREA_TOL:
        raise DegenerateQuad(f"polygon area {area} below {AREA_TOL}")
    if require_convex:
        # cross products of consecutive edges must not turn clockwise
        # (tolerance scaled by edge lengths so near-collinear corners pass)
        for i in range(n):
            ax, ay = vertices[i]
            bx, by = vertices[(i + 1) % n]
            cx, cy = vertices[(i + 2) % n]
            cross = (bx - ax) * (cy - ay) - (by - ay) * (cx - ax)
            scale = math.hypot(bx - ax, by - ay) * math.hypot(cx - ax, cy - ay)
            if cross < -1e-9 * max(scale, 1.0):
                raise DegenerateQuad("polygon is not convex")
    return vertices


@dataclass(frozen=True)
class QuadPolygon:
    """Convex quadrilateral, vertices counterclockwise (positive shoelace area).

    Clockwise input is reoriented; degenerate or concave input raises
    DegenerateQuad.
    """

    vertices: tuple[Point, Point, Point, Point]

    def __post_init__(self):
        if len(self.vertices) != 4:
            raise ValueError(f"QuadPolygon needs 4 vertices, got {len(self.vertices)}")
        verts = tuple((float(x), float(y)) for x, y in self.vertices)
        verts = _validate_polygon(verts, require_convex=True)
        object.__setattr__(self, "vertices", verts)


@dataclass(frozen=True)
class ConvexPolygon:
    """Convex polygon with 3..8 counterclockwise vertices.

    The intersection of two quadrilaterals has at most 8 vertices, which is
    the only way these are produced.
    """

    vertices: tuple[Point, ...]

    def __post_init__(self):
        if not 3 <= len(self.vertices) <= 8:
            raise ValueError(f"ConvexPolygon needs 3..8 vertices, got {len(self.vertices)}")
        verts = tuple((float(x), float(y)) for x, y in self.vertices)
        verts = _validate_polygon(verts, require_convex=False)
        object.__setattr__(self, "vertices", verts)


def quad_from_rbox(box: RotatedBox) -> QuadPolygon:
    """Four corners of the rectangle rotated by `angle` about its center, CCW."""
    c, s = math.cos(box.angle), math.sin(box.angle)
    hw, hh = box.w / 2, box.h / 2
    corners = []
    for lx, ly in ((-hw, -hh), (hw, -hh), (hw, hh), (-hw, hh)):
        corners.append((box.cx + lx * c - ly * s, box.cy + lx * s + ly * c))
    return QuadPolygon(tuple(corners))


def _convex_hull(points: list[Point]) -> list[Point]:
    """Monotone-chain convex hull, counterclockwise, collinear points dropped."""
    pts = sorted(set(points))
    if len(pts) <= 2:
        return pts

    def half(seq):
        chain = []
        for p in seq:
            while len(chain) >= 2:
                ox, oy = chain[-2]
                ax, ay = chain[-1]
                if (ax - ox) * (p[1] - oy) - (ay - oy) * (p[0] - ox) <= 0:
                    chain.pop()
                else:
                    break
            chain.append(p)
        return chain

    lower = half(pts)
    upper = half(reversed(pts))
    return lower[:-1] + upper[:-1]


def rbox_from_quad(quad: QuadPolygon) -> RotatedBox:
    """Minimum-area enclosing rotated rectangle of the quad (rotating calipers).

    For quads that are exact rectangles this inverts quad_from_rbox up to the
    angle-mod-pi / w-h-swap equivalence. Area ties between caliper
    orientations (every exact rectangle has them) are broken by the smallest
    edge orientation in [0, pi), so a rectangle built with an angle in
    [0, pi/2) round-trips to its literal parameters.
    """
    hull = _convex_hull(list(quad.vertices))
    if len(hull) < 3:
        raise DegenerateQuad("quad collapses to fewer than 3 hull points")

    candidates = []
    n = len(hull)
    for i in range(n):
        ax, ay = hull[i]
        bx, by = hull[(i + 1) % n]
        theta = math.atan2(by - ay, bx - ax) % math.pi
        c, s = math.cos(theta), math.sin(theta)
        # rotate hull by -theta; enclosing box is axis-aligned there
        rx = [x * c + y * s for x, y in hull]
        ry = [-x * s + y * c for x, y in hull]
        w = max(rx) - min(rx)
        h = max(ry) - min(ry)
        candidates.append((w * h, theta, w, h, (min(rx) + max(rx)) / 2, (min(ry) + max(ry)) / 2))

    best_area = min(c[0] for c in candidates)
    if best_area < AREA_TOL:
        raise DegenerateQuad(f"enclosing rectangle area {best_area} below {AREA_TOL}")
    tied = [c for c in candidates if c[0] <= best_area * (1 + 1e-9)]
    _, theta, w, h, mx, my = min(tied, key=lambda c: c[1])
    c, s = math.cos(theta), math.sin(theta)
    return RotatedBox(cx=mx * c - my * s, cy=mx * s + my * c, w=w, h=h, angle=theta)


def polygon_area(p: ConvexPolygon | QuadPolygon) -> float:
    """Positive shoelace area."""
    return _shoelace(p.vertices)


def convex_intersection(a: QuadPolygon, b: QuadPolygon) -> ConvexPolygon | None:
    """Sutherland-Hodgman clip of `a` against `b`; None when the overlap is empty.

    Tangential contact (shared edge or corner, zero area) counts as empty.
    """
    output = list(a.vertices)
    clip = b.vertices
    n = len(clip)
    for i in range(n):
        if not output:
            return None
        ex, ey = clip[i]
        fx, fy = clip[(i + 1) % n]
        dx, dy = fx - ex, fy - ey
        sides = [dx * (py - ey) - dy * (px - ex) for px, py in output]
        clipped: list[Point] = []
        m = len(output)
        for j in range(m):
            cur, nxt = j, (j + 1) % m
            cur_in, nxt_in = sides[cur] >= 0, sides[nxt] >= 0
            if cur_in:
                clipped.append(output[cur])
            if cur_in != nxt_in:
                # segment crosses the clip line; interpolate by side distances
                t = sides[cur] / (sides[cur] - sides[nxt])
                px, py = output[cur]
                qx, qy = output[nxt]
                clipped.append((px + t * (qx - px), py + t * (qy - py)))
        output = clipped

    # drop duplicate vertices the clipping may have introduced
    deduped: list[Point] = []
    for p in output:
        if not deduped or (abs(p[0] - deduped[-1][0]) > VERTEX_TOL or abs(p[1] - deduped[-1][1]) > VERTEX_TOL):
            deduped.append(p)
    while len(deduped) >= 2 and abs(deduped[0][0] - deduped[-1][0]) <= VERTEX_TOL and abs(deduped[0][1] - deduped[-1][1]) <= VERTEX_TOL:
        deduped.pop()
    if len(deduped) < 3 or _shoelace(tuple(deduped)) < AREA_TOL:
        return None
    try:
        return ConvexPolygon(tuple(deduped))
    except DegenerateQuad:
        # pinched sliver: non-adjacent vertices coincide within tolerance
        return None


def rotated_iou(a: RotatedBox, b: RotatedBox) -> float:
    """area(a ∩ b) / area(a ∪ b), in [0, 1]; symmetric; 1.0 exactly for a == b.

    Union is computed as area(a) + area(b) - area(a ∩ b). Box areas use the
    same shoelace path as the intersection so that identical boxes yield
    exactly 1.0.
    """
    qa, qb = quad_from_rbox(a), quad_from_rbox(b)
    inter_poly = convex_intersection(qa, qb)
    if inter_poly is None:
        return 0.0
    inter = polygon_area(inter_poly)
    union = polygon_area(qa) + polygon_area(qb) - inter
    if union <= 0:
        return 0.0
    return min(max(inter / union, 0.0), 1.0)
