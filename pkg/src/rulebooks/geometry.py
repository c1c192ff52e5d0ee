"""Planar geometry helpers: oriented boxes, convex polygons, polylines."""

from __future__ import annotations

import bisect
import math
from typing import Sequence

Point = tuple[float, float]

__all__ = [
    "wrap_angle",
    "obb_corners",
    "convex_overlap",
    "segments_intersect",
    "segment_intersection_point",
    "polygon_crosses_polyline",
    "point_in_polygon",
    "point_segment_distance",
    "convex_distance",
    "point_polygon_distance",
    "polyline_length",
    "polyline_self_intersects",
    "project_onto_polyline",
    "ArcPath",
]


def wrap_angle(a: float) -> float:
    """Map an angle to [-pi, pi)."""
    return (a + math.pi) % (2 * math.pi) - math.pi


def obb_corners(x: float, y: float, heading: float, length: float, width: float) -> list[Point]:
    """Corners of a box centred at (x, y), counter-clockwise from rear-right."""
    hl, hw = length / 2.0, width / 2.0
    c, s = math.cos(heading), math.sin(heading)
    return [
        (x + dx * c - dy * s, y + dx * s + dy * c)
        for dx, dy in ((-hl, -hw), (hl, -hw), (hl, hw), (-hl, hw))
    ]


def _axes(poly: Sequence[Point]):
    n = len(poly)
    for i in range(n):
        x1, y1 = poly[i]
        x2, y2 = poly[(i + 1) % n]
        ex, ey = x2 - x1, y2 - y1
        norm = math.hypot(ex, ey)
        if norm > 0:
            yield (-ey / norm, ex / norm)


def _project(poly: Sequence[Point], axis: Point) -> tuple[float, float]:
    dots = [px * axis[0] + py * axis[1] for px, py in poly]
    return min(dots), max(dots)


def convex_overlap(p: Sequence[Point], q: Sequence[Point]) -> bool:
    """Separating-axis test; touching boundaries count as overlap."""
    for poly in (p, q):
        for axis in _axes(poly):
            a0, a1 = _project(p, axis)
            b0, b1 = _project(q, axis)
            if a1 < b0 or b1 < a0:
                return False
    return True


def _orient(a: Point, b: Point, c: Point) -> float:
    return (b[0] - a[0]) * (c[1] - a[1]) - (b[1] - a[1]) * (c[0] - a[0])


def _on_segment(a: Point, b: Point, c: Point) -> bool:
    return min(a[0], b[0]) <= c[0] <= max(a[0], b[0]) and min(a[1], b[1]) <= c[1] <= max(a[1], b[1])


def segments_intersect(p1: Point, p2: Point, q1: Point, q2: Point) -> bool:
    d1 = _orient(q1, q2, p1)
    d2 = _orient(q1, q2, p2)
    d3 = _orient(p1, p2, q1)
    d4 = _orient(p1, p2, q2)
    if ((d1 > 0 and d2 < 0) or (d1 < 0 and d2 > 0)) and ((d3 > 0 and d4 < 0) or (d3 < 0 and d4 > 0)):
        return True
    if d1 == 0 and _on_segment(q1, q2, p1):
        return True
    if d2 == 0 and _on_segment(q1, q2, p2):
        return True
    if d3 == 0 and _on_segment(p1, p2, q1):
        return True
    if d4 == 0 and _on_segment(p1, p2, q2):
        return True
    return False


def segment_intersection_point(p1: Point, p2: Point, q1: Point, q2: Point) -> Point | None:
    """Intersection of two segments, or None (parallel overlaps return None)."""
    rx, ry = p2[0] - p1[0], p2[1] - p1[1]
    sx, sy = q2[0] - q1[0], q2[1] - q1[1]
    den = rx * sy - ry * sx
    if den == 0:
        return None
    qpx, qpy = q1[0] - p1[0], q1[1] - p1[1]
    t = (qpx * sy - qpy * sx) / den
    u = (qpx * ry - qpy * rx) / den
    if 0 <= t <= 1 and 0 <= u <= 1:
        return (p1[0] + t * rx, p1[1] + t * ry)
    return None


def polygon_crosses_polyline(poly: Sequence[Point], line: Sequence[Point]) -> bool:
    n = len(poly)
    for i in range(n):
        a, b = poly[i], poly[(i + 1) % n]
        for j in range(len(line) - 1):
            if segments_intersect(a, b, line[j], line[j + 1]):
                return True
    return False


def point_in_polygon(pt: Point, poly: Sequence[Point]) -> bool:
    """Even-odd ray casting; points on an edge count as inside."""
    x, y = pt
    n = len(poly)
    inside = False
    for i in range(n):
        a, b = poly[i], poly[(i + 1) % n]
        if _orient(a, b, pt) == 0 and _on_segment(a, b, pt):
            return True
        if (a[1] > y) != (b[1] > y):
            xc = a[0] + (y - a[1]) * (b[0] - a[0]) / (b[1] - a[1])
            if x < xc:
                inside = not inside
    return inside


def point_segment_distance(p: Point, a: Point, b: Point) -> float:
    ax, ay = a
    dx, dy = b[0] - ax, b[1] - ay
    den = dx * dx + dy * dy
    if den == 0:
        return math.hypot(p[0] - ax, p[1] - ay)
    t = max(0.0, min(1.0, ((p[0] - ax) * dx + (p[1] - ay) * dy) / den))
    return math.hypot(p[0] - ax - t * dx, p[1] - ay - t * dy)


def convex_distance(p: Sequence[Point], q: Sequence[Point]) -> float:
    """Euclidean distance between two convex polygons (0 when they overlap)."""
    if convex_overlap(p, q):
        return 0.0
    best = math.inf
    for poly, other in ((p, q), (q, p)):
        m = len(other)
        for v in poly:
            for i in range(m):
                best = min(best, point_segment_distance(v, other[i], other[(i + 1) % m]))
    return best


def point_polygon_distance(pt: Point, poly: Sequence[Point]) -> float:
    if point_in_polygon(pt, poly):
        return 0.0
    n = len(poly)
    return min(point_segment_distance(pt, poly[i], poly[(i + 1) % n]) for i in range(n))


def polyline_length(points: Sequence[Point]) -> float:
    return sum(math.dist(points[i], points[i + 1]) for i in range(len(points) - 1))


def polyline_self_intersects(points: Sequence[Point]) -> bool:
    n = len(points) - 1
    for i in range(n):
        for j in range(i + 2, n):
            if i == 0 and j == n - 1 and points[0] == points[-1]:
                continue
            if segments_intersect(points[i], points[i + 1], points[j], points[j + 1]):
                return True
    return False


def project_onto_polyline(pt: Point, line: Sequence[Point]) -> tuple[float, float, float]:
    """Return (distance, segment heading, arc length) of the nearest point on ``line``."""
    best = (math.inf, 0.0, 0.0)
    s0 = 0.0
    for i in range(len(line) - 1):
        a, b = line[i], line[i + 1]
        seg = math.dist(a, b)
        if seg == 0:
            continue
        dx, dy = b[0] - a[0], b[1] - a[1]
        t = max(0.0, min(1.0, ((pt[0] - a[0]) * dx + (pt[1] - a[1]) * dy) / (seg * seg)))
        d = math.hypot(pt[0] - a[0] - t * dx, pt[1] - a[1] - t * dy)
        if d < best[0]:
            best = (d, math.atan2(dy, dx), s0 + t * seg)
        s0 += seg
    return best


class ArcPath:
    """Poses along a polyline parametrised by arc length.

    Headings are interpolated between the given per-vertex headings; beyond
    the last vertex the path continues straight along the final heading.
    """

    def __init__(self, points: Sequence[Point], headings: Sequence[float]):
        if len(points) != len(headings) or not points:
            raise ValueError("ArcPath needs matching, non-empty points and headings")
        self.points = list(points)
        self.headings = list(headings)
        cum = [0.0]
        for i in range(len(points) - 1):
            cum.append(cum[-1] + math.dist(points[i], points[i + 1]))
        self.cum = cum

    @property
    def length(self) -> float:
        return self.cum[-1]

    def pose_at(self, s: float) -> tuple[float, float, float]:
        pts, cum = self.points, self.cum
        if s <= 0:
            x, y = pts[0]
            return x, y, self.headings[0]
        if s >= cum[-1]:
            x, y = pts[-1]
            h = self.headings[-1]
            extra = s - cum[-1]
            return x + extra * math.cos(h), y + extra * math.sin(h), h
        i = bisect.bisect_right(cum, s) - 1
        i = min(i, len(pts) - 2)
        seg = cum[i + 1] - cum[i]
        f = 0.0 if seg == 0 else (s - cum[i]) / seg
        (x0, y0), (x1, y1) = pts[i], pts[i + 1]
        h0, h1 = self.headings[i], self.headings[i + 1]
        h = h0 + f * wrap_angle(h1 - h0)
        return x0 + f * (x1 - x0), y0 + f * (y1 - y0), h

    def resample(self, spacing: float) -> list[tuple[float, float, float]]:
        """Poses at every vertex plus intermediate points no more than ``spacing`` apart."""
        poses = []
        for i in range(len(self.points) - 1):
            seg = self.cum[i + 1] - self.cum[i]
            k = max(1, math.ceil(seg / spacing))
            for j in range(k):
                poses.append(self.pose_at(self.cum[i] + seg * j / k))
        x, y = self.points[-1]
        poses.append((x, y, self.headings[-1]))
        return poses
