"""Planar convex hull machinery for hull-conditioned transformations.

Provides the extremal vertices of a configuration restricted to a ball
around the origin, strict interior membership, and the largest
origin-centered disk inscribed in the hull.  Double precision with an
absolute orientation epsilon is enough at desk scale; no exact
arithmetic.
"""
from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

ORIENT_EPS = 1e-12


def _cross(o, a, b) -> float:
    return (a[0] - o[0]) * (b[1] - o[1]) - (a[1] - o[1]) * (b[0] - o[0])


@dataclass(frozen=True)
class HullData:
    """Convex hull: extremal vertices in counterclockwise order.

    ``degenerate`` is set when there are fewer than 3 affinely
    independent points; a degenerate hull has empty interior.
    """

    vertices: tuple[tuple[float, float], ...]
    degenerate: bool


def convex_hull(points) -> HullData:
    """Monotone-chain hull of 2-d points.

    Collinear boundary points are dropped, so the vertices are exactly
    the extremal points.  Fewer than 3 points, or all points collinear,
    gives a degenerate hull.
    """
    pts = sorted({(float(p[0]), float(p[1])) for p in points})
    if len(pts) < 3:
        return HullData(tuple(pts), True)

    lower = []
    for p in pts:
        while len(lower) > 1 and _cross(lower[-2], lower[-1], p) <= ORIENT_EPS:
            lower.pop()
        lower.append(p)
    upper = []
    for p in reversed(pts):
        while len(upper) > 1 and _cross(upper[-2], upper[-1], p) <= ORIENT_EPS:
            upper.pop()
        upper.append(p)
    verts = lower[:-1] + upper[:-1]
    if len(verts) < 3:
        return HullData(tuple(sorted(verts)), True)
    return HullData(tuple(verts), False)


def extremal_vertices(omega, ball_radius: float = 1.0) -> HullData:
    """Hull of the points of w strictly inside the ball ||x|| < radius."""
    if ball_radius <= 0:
        raise ValueError("ball_radius must be positive")
    inside = [p for p in omega if math.hypot(p[0], p[1]) < ball_radius]
    return convex_hull(inside)


def contains_interior(hull: HullData, x) -> bool:
    """True iff x lies strictly inside the hull polygon."""
    if hull.degenerate:
        return False
    verts = hull.vertices
    px, py = float(x[0]), float(x[1])
    n = len(verts)
    for i in range(n):
        a = verts[i]
        b = verts[(i + 1) % n]
        if (b[0] - a[0]) * (py - a[1]) - (b[1] - a[1]) * (px - a[0]) <= ORIENT_EPS:
            return False
    return True


def inscribed_disk(hull: HullData) -> tuple[tuple[float, float], float]:
    """Largest origin-centered open disk inside the hull.

    Returns ``((0.0, 0.0), radius)``; the radius is the minimum distance
    from the origin to the supporting lines of the hull edges, or 0 when
    the hull is degenerate or the origin is not strictly inside.
    """
    if hull.degenerate or not contains_interior(hull, (0.0, 0.0)):
        return (0.0, 0.0), 0.0
    verts = hull.vertices
    n = len(verts)
    radius = math.inf
    for i in range(n):
        ax, ay = verts[i]
        bx, by = verts[(i + 1) % n]
        # distance from origin to the line through the CCW edge (a, b)
        edge_len = math.hypot(bx - ax, by - ay)
        if edge_len == 0.0:
            continue
        dist = (ax * by - ay * bx) / edge_len
        radius = min(radius, dist)
    return (0.0, 0.0), max(radius, 0.0)


def hull_interior_radius_rows(pts: np.ndarray, ball_radius: float):
    """Internal fast path: hull + inscribed radius from an (n, 2) array."""
    if pts.shape[0] == 0:
        return HullData((), True), 0.0
    norms = np.hypot(pts[:, 0], pts[:, 1])
    inside = pts[norms < ball_radius]
    hull = convex_hull(map(tuple, inside.tolist())) if inside.shape[0] else HullData((), True)
    _, radius = inscribed_disk(hull)
    return hull, radius
