import math

import numpy as np
import pytest

from ppmix import (contains_interior, convex_hull, extremal_vertices,
                   inscribed_disk, make_configuration)

from helpers import shapely_contains, shapely_hull_vertices


class TestConvexHull:
    def test_interior_point_dropped(self):
        hull = convex_hull([(0, 0), (1, 0), (0, 1), (0.2, 0.2)])
        assert not hull.degenerate
        assert set(hull.vertices) == {(0.0, 0.0), (1.0, 0.0), (0.0, 1.0)}

    def test_two_points_degenerate(self):
        assert convex_hull([(0, 0), (1, 1)]).degenerate

    def test_all_collinear_degenerate(self):
        assert convex_hull([(0, 0), (1, 1), (2, 2), (3, 3)]).degenerate

    def test_collinear_boundary_point_dropped(self):
        hull = convex_hull([(0, 0), (1, 0), (2, 0), (1, 1)])
        assert set(hull.vertices) == {(0.0, 0.0), (2.0, 0.0), (1.0, 1.0)}

    def test_counterclockwise_orientation(self):
        hull = convex_hull([(0, 0), (2, 0), (2, 2), (0, 2), (1, 1)])
        verts = hull.vertices
        area2 = sum(verts[i][0] * verts[(i + 1) % len(verts)][1]
                    - verts[(i + 1) % len(verts)][0] * verts[i][1]
                    for i in range(len(verts)))
        assert area2 > 0

    def test_idempotence(self):
        rng = np.random.default_rng(3)
        for _ in range(40):
            pts = rng.uniform(-1, 1, size=(rng.integers(3, 12), 2))
            hull = convex_hull(map(tuple, pts))
            if hull.degenerate:
                continue
            again = convex_hull(hull.vertices)
            assert set(again.vertices) == set(hull.vertices)

    def test_matches_shapely_oracle(self):
        rng = np.random.default_rng(4)
        for _ in range(60):
            pts = [tuple(p) for p in rng.uniform(-1, 1, size=(rng.integers(3, 13), 2))]
            hull = convex_hull(pts)
            oracle = shapely_hull_vertices(pts)
            if hull.degenerate:
                assert len(oracle) < 3 or len(set(pts)) < 3
            else:
                assert set(hull.vertices) == oracle

    def test_extremality_brute_force(self):
        rng = np.random.default_rng(5)
        for _ in range(30):
            pts = [tuple(p) for p in rng.uniform(-1, 1, size=(10, 2))]
            hull = convex_hull(pts)
            if hull.degenerate:
                continue
            for v in hull.vertices:
                others = [p for p in pts if p != v]
                assert not shapely_contains(others, v)
            for p in pts:
                if p not in hull.vertices:
                    assert shapely_contains([q for q in pts if q != p], p)


class TestExtremalVertices:
    def test_all_outside_ball(self):
        w = make_configuration([(2, 0), (0, 2), (-2, 0)])
        assert extremal_vertices(w, 1.0).degenerate

    def test_three_inside(self):
        w = make_configuration([(0.1, 0.1), (0.5, 0.1), (0.1, 0.5)])
        hull = extremal_vertices(w, 1.0)
        assert set(hull.vertices) == {(0.1, 0.1), (0.5, 0.1), (0.1, 0.5)}

    def test_outside_points_never_vertices(self):
        rng = np.random.default_rng(6)
        for _ in range(30):
            pts = [tuple(p) for p in rng.uniform(-1.5, 1.5, size=(12, 2))]
            w = make_configuration(pts)
            hull = extremal_vertices(w, 1.0)
            for v in hull.vertices:
                assert math.hypot(*v) < 1.0
            # filter-then-hull oracle
            inside = [p for p in pts if math.hypot(*p) < 1.0]
            assert set(hull.vertices) <= set(inside)
            if not hull.degenerate:
                assert set(hull.vertices) == shapely_hull_vertices(inside)

    def test_sphere_boundary_excluded(self):
        w = make_configuration([(1.0, 0.0), (0.0, 1.0), (-1.0, 0.0), (0.1, 0.1)])
        assert extremal_vertices(w, 1.0).degenerate


class TestContainsInterior:
    def test_triangle_inner_point(self):
        hull = convex_hull([(0, 0), (1, 0), (0, 1)])
        assert contains_interior(hull, (0.2, 0.2))

    def test_edge_point_excluded(self):
        hull = convex_hull([(0, 0), (1, 0), (0, 1)])
        assert not contains_interior(hull, (0.5, 0.0))

    def test_degenerate_always_false(self):
        hull = convex_hull([(0, 0), (1, 1)])
        assert not contains_interior(hull, (0.5, 0.5))

    def test_against_barycentric_oracle(self):
        rng = np.random.default_rng(7)
        tri = [(0.0, 0.0), (1.0, 0.0), (0.0, 1.0)]
        hull = convex_hull(tri)
        for _ in range(200):
            a, b = rng.uniform(0, 1, size=2)
            probe = (a, b)
            expected = a > 0 and b > 0 and a + b < 1
            assert contains_interior(hull, probe) == expected


class TestInscribedDisk:
    def test_square(self):
        hull = convex_hull([(1, 1), (-1, 1), (-1, -1), (1, -1)])
        center, radius = inscribed_disk(hull)
        assert center == (0.0, 0.0)
        assert radius == pytest.approx(1.0, abs=1e-12)

    def test_origin_outside(self):
        hull = convex_hull([(1, 0), (0, 1), (1, 1)])
        assert inscribed_disk(hull)[1] == 0.0

    def test_degenerate(self):
        hull = convex_hull([(0, 0), (1, 1)])
        assert inscribed_disk(hull)[1] == 0.0

    def test_disk_fits_inside(self):
        rng = np.random.default_rng(8)
        for _ in range(40):
            pts = [tuple(p) for p in rng.uniform(-1, 1, size=(8, 2))]
            hull = convex_hull(pts)
            _, radius = inscribed_disk(hull)
            if radius == 0.0:
                continue
            for k in range(64):
                theta = 2 * math.pi * k / 64
                probe = (0.999 * radius * math.cos(theta),
                         0.999 * radius * math.sin(theta))
                assert contains_interior(hull, probe)

    def test_insertion_monotonicity(self):
        # adding a point strictly inside the hull never changes the vertices
        rng = np.random.default_rng(9)
        for _ in range(40):
            pts = [tuple(p) for p in rng.uniform(-1, 1, size=(7, 2))]
            hull = convex_hull(pts)
            if hull.degenerate:
                continue
            cx = sum(v[0] for v in hull.vertices) / len(hull.vertices)
            cy = sum(v[1] for v in hull.vertices) / len(hull.vertices)
            inner = (0.7 * cx + 0.3 * hull.vertices[0][0] * 0.01,
                     0.7 * cy + 0.3 * hull.vertices[0][1] * 0.01)
            if not contains_interior(hull, inner):
                continue
            grown = convex_hull(list(pts) + [inner])
            assert set(grown.vertices) == set(hull.vertices)
