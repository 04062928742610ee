"""Planar primitives and predicates shared by the rest of the package.

Everything here is a pure function of its arguments. Lines are kept in
normalized implicit form (A*x + B*y + C = 0 with A**2 + B**2 == 1) so that
vertical edges need no special casing.
"""

from __future__ import annotations

import math
from typing import NamedTuple, Optional, Tuple

import numpy as np


class GeometryError(ValueError):
    """Raised when a primitive is asked to work on degenerate input."""


class Point(NamedTuple):
    x: float
    y: float


class Segment(NamedTuple):
    a: Point
    b: Point


class LineEq(NamedTuple):
    A: float
    B: float
    C: float

    def value(self, p) -> float:
        """Signed distance of ``p`` from the line."""
        return self.A * p[0] + self.B * p[1] + self.C

    @property
    def direction(self) -> Tuple[float, float]:
        return (self.B, -self.A)


class Circle(NamedTuple):
    center: Point
    radius: float


def _check_finite(*values: float) -> None:
    for v in values:
        if not math.isfinite(v):
            raise GeometryError(f"non-finite coordinate {v!r}")


def dist_point_segment(p, s) -> float:
    ax, ay = s[0]
    bx, by = s[1]
    dx, dy = bx - ax, by - ay
    den = dx * dx + dy * dy
    if den == 0.0:
        raise GeometryError("zero-length segment")
    t = ((p[0] - ax) * dx + (p[1] - ay) * dy) / den
    t = min(1.0, max(0.0, t))
    return math.hypot(p[0] - (ax + t * dx), p[1] - (ay + t * dy))


def line_through(a, b) -> LineEq:
    _check_finite(a[0], a[1], b[0], b[1])
    dx, dy = b[0] - a[0], b[1] - a[1]
    norm = math.hypot(dx, dy)
    if norm == 0.0:
        raise GeometryError("line through coincident points")
    A, B = -dy / norm, dx / norm
    if A < 0 or (A == 0 and B < 0):
        A, B = -A, -B
    # +0.0 keeps -0.0 out of the coefficients
    C = -(A * a[0] + B * a[1]) + 0.0
    return LineEq(A + 0.0, B + 0.0, C)


def offset_line(l: LineEq, d: float, toward) -> LineEq:
    """Parallel to ``l`` at distance ``d``, on the side containing ``toward``."""
    if d <= 0:
        raise GeometryError("offset distance must be positive")
    side = l.value(toward)
    if side == 0.0:
        raise GeometryError("reference point lies on the line; side is ambiguous")
    return LineEq(l.A, l.B, l.C - math.copysign(d, side) + 0.0)


def angle_between(d1, d2) -> float:
    n1 = math.hypot(d1[0], d1[1])
    n2 = math.hypot(d2[0], d2[1])
    if n1 == 0.0 or n2 == 0.0:
        raise GeometryError("zero direction vector")
    cross = d1[0] * d2[1] - d1[1] * d2[0]
    dot = d1[0] * d2[0] + d1[1] * d2[1]
    return math.atan2(abs(cross), dot)


def circle_segment_chord(c: Circle, s) -> Optional[Segment]:
    """Intersection of the closed disk with the segment, or None."""
    (ax, ay), (bx, by) = s
    cx, cy = c.center
    dx, dy = bx - ax, by - ay
    a2 = dx * dx + dy * dy
    if a2 == 0.0:
        raise GeometryError("zero-length segment")
    fx, fy = ax - cx, ay - cy
    half_b = fx * dx + fy * dy
    cc = fx * fx + fy * fy - c.radius * c.radius
    disc = half_b * half_b - a2 * cc
    if disc < 0:
        return None
    root = math.sqrt(disc)
    t0 = max(0.0, (-half_b - root) / a2)
    t1 = min(1.0, (-half_b + root) / a2)
    if t0 > t1:
        return None
    return Segment(Point(ax + t0 * dx, ay + t0 * dy), Point(ax + t1 * dx, ay + t1 * dy))


def sentinel_positions(c: Circle, edge_line: LineEq, side_foot, eps: float) -> Tuple[Point, Point]:
    """Mirrored pair on ``c`` at perpendicular distance ``eps`` from the edge line.

    The pair sits above the foot nearer to ``side_foot``. The first point is on
    the positive side of ``edge_line``.
    """
    r = c.radius
    if eps <= 0:
        raise GeometryError("offset must be positive")
    if eps >= r:
        raise GeometryError(f"offset {eps} does not fit inside radius {r}")
    off = edge_line.value(c.center)
    if abs(off) > 1e-9 * max(1.0, r):
        raise GeometryError("circle center is not on the edge line")
    dx, dy = edge_line.direction
    px, py = c.center[0] - off * edge_line.A, c.center[1] - off * edge_line.B
    h = math.sqrt(r * r - eps * eps)
    sgn = 1.0 if (side_foot[0] - px) * dx + (side_foot[1] - py) * dy >= 0 else -1.0
    fx, fy = px + sgn * h * dx, py + sgn * h * dy
    n = (edge_line.A, edge_line.B)
    return (Point(fx + eps * n[0], fy + eps * n[1]), Point(fx - eps * n[0], fy - eps * n[1]))


def grow_circle_on_edge(edge_line: LineEq, edge_point, edge_dir, anchor, obstacle: LineEq) -> Circle:
    """Circle centered on the edge, through ``anchor``, tangent to ``obstacle``.

    The center is ``edge_point + t * edge_dir``; ``t`` solves
    ``|center - anchor|**2 == dist(center, obstacle)**2``. Of the real roots,
    the smallest one past the anchor's foot is used.
    """
    if abs(edge_line.value(anchor)) == 0.0:
        raise GeometryError("anchor lies on the edge line")
    px, py = edge_point
    dx, dy = edge_dir
    gx, gy = px - anchor[0], py - anchor[1]
    g = dx * gx + dy * gy
    h = gx * gx + gy * gy
    L0 = obstacle.value((px, py))
    L1 = obstacle.A * dx + obstacle.B * dy
    qa = 1.0 - L1 * L1
    qb = 2.0 * (g - L0 * L1)
    qc = h - L0 * L0
    roots = _real_roots(qa, qb, qc)
    t_foot = -g
    ahead = [t for t in roots if t > t_foot]
    if not roots:
        raise GeometryError("no circle through the anchor can reach the obstacle line")
    if not ahead:
        raise GeometryError("every solution lies behind the anchor")
    t = min(ahead)
    center = Point(px + t * dx, py + t * dy)
    return Circle(center, abs(obstacle.value(center)))


def _real_roots(a: float, b: float, c: float) -> list:
    scale = max(abs(a), abs(b), abs(c))
    if scale == 0.0:
        return []
    if abs(a) <= 1e-14 * scale:
        return [] if b == 0.0 else [-c / b]
    disc = b * b - 4 * a * c
    if disc < 0:
        return []
    sq = math.sqrt(disc)
    # cancellation-free pairing
    q = -0.5 * (b + math.copysign(sq, b))
    out = [q / a]
    if q != 0.0:
        out.append(c / q)
    return sorted(out)


def strictly_inside(p, c: Circle, tol: float) -> bool:
    return math.hypot(p[0] - c.center[0], p[1] - c.center[1]) < c.radius - tol


def orient(a, b, c) -> float:
    return (b[0] - a[0]) * (c[1] - a[1]) - (b[1] - a[1]) * (c[0] - a[0])


# ---------------------------------------------------------------------------
# vectorized helpers

def point_segment_distance(px, py, ax, ay, bx, by) -> np.ndarray:
    """Broadcasting distance from points to segments."""
    dx, dy = bx - ax, by - ay
    den = dx * dx + dy * dy
    with np.errstate(invalid="ignore", divide="ignore"):
        t = ((px - ax) * dx + (py - ay) * dy) / den
    t = np.clip(np.nan_to_num(t), 0.0, 1.0)
    return np.hypot(px - (ax + t * dx), py - (ay + t * dy))


def segments_cross(p1, p2, q1, q2) -> np.ndarray:
    """Closed intersection test of segment p1p2 against arrays of segments q1q2.

    Touching and collinear overlap count as intersecting.
    """
    def orient_v(a, b, c):
        return (b[..., 0] - a[..., 0]) * (c[..., 1] - a[..., 1]) - (b[..., 1] - a[..., 1]) * (c[..., 0] - a[..., 0])

    p1 = np.asarray(p1, float)
    p2 = np.asarray(p2, float)
    d1 = orient_v(q1, q2, p1)
    d2 = orient_v(q1, q2, p2)
    d3 = orient_v(p1, p2, q1)
    d4 = orient_v(p1, p2, q2)
    proper = (d1 * d2 < 0) & (d3 * d4 < 0)

    def on_seg(a, b, c, d):
        return (d == 0) & (np.minimum(a[..., 0], b[..., 0]) <= c[..., 0]) & (c[..., 0] <= np.maximum(a[..., 0], b[..., 0])) \
            & (np.minimum(a[..., 1], b[..., 1]) <= c[..., 1]) & (c[..., 1] <= np.maximum(a[..., 1], b[..., 1]))

    p1b = np.broadcast_to(p1, q1.shape)
    p2b = np.broadcast_to(p2, q1.shape)
    touch = on_seg(q1, q2, p1b, d1) | on_seg(q1, q2, p2b, d2) | on_seg(p1b, p2b, q1, d3) | on_seg(p1b, p2b, q2, d4)
    return proper | touch
