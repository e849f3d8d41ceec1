"""
Tests for the geometry kernel.
"""
import itertools
import math
import time

import numpy as np
import pytest
import shapely

from stockpile_tracker.exceptions import DegenerateInput, GeometryError, NotConvex
from stockpile_tracker.geometry import (INFINITE, Location, MultiPolygon, Point2, Polygon, Ring,
                                        Triangle, alpha_shape, canonical_points, classify_points,
                                        convex_hull, convex_intersection_area, covered_mask,
                                        delaunay_triangulate, in_circumcircle, is_convex,
                                        orientation, point_in_polygon, polygon_area)
from stockpile_tracker.scenarios import blob, c_shape


def disk_points(rng, n):
    r = np.sqrt(rng.uniform(0, 1, n))
    theta = rng.uniform(0, 2 * np.pi, n)
    return [Point2(x, y) for x, y in zip(r * np.cos(theta), r * np.sin(theta))]


def hull_vertices_by_edges(points):
    """Points that start an edge with every other point strictly to its left."""
    p = np.asarray(points, dtype=float)
    d = p[None, :, :] - p[:, None, :]                     # d[i, j] = p_j - p_i
    cross = d[:, :, None, 0] * d[:, None, :, 1] - d[:, :, None, 1] * d[:, None, :, 0]
    n = len(p)
    idx = np.arange(n)
    cross[idx, :, idx] = np.inf
    cross[:, idx, idx] = np.inf
    is_edge = (cross > 0).all(axis=2)
    is_edge[idx, idx] = False
    return {tuple(points[i]) for i in np.flatnonzero(is_edge.any(axis=1))}


def strictly_inside_triangle(q, a, b, c):
    turns = [orientation(a, b, q), orientation(b, c, q), orientation(c, a, q)]
    return all(t > 0 for t in turns) or all(t < 0 for t in turns)


def hull_vertices_by_triangles(points):
    kept = set()
    for p in points:
        others = [q for q in points if q != p]
        if not any(strictly_inside_triangle(p, *tri) for tri in itertools.combinations(others, 3)):
            kept.add(tuple(p))
    return kept


# convex_hull

def test_convex_hull_triangle():
    """Three points form their own CCW hull."""
    hull = convex_hull([(0, 0), (1, 0), (0, 1)])
    assert hull.vertices == (Point2(0, 0), Point2(1, 0), Point2(0, 1))


def test_convex_hull_excludes_interior_point():
    """An interior point is never a hull vertex."""
    hull = convex_hull([(0, 0), (1, 0), (1, 1), (0, 1), (0.5, 0.5)])
    assert set(hull.vertices) == {(0, 0), (1, 0), (1, 1), (0, 1)}
    assert hull.area == pytest.approx(1.0)


def test_convex_hull_drops_collinear_boundary_points():
    """Points in the middle of a hull edge are not vertices."""
    hull = convex_hull([(0, 0), (1, 0), (2, 0), (2, 2), (0, 2), (0, 1)])
    assert set(hull.vertices) == {(0, 0), (2, 0), (2, 2), (0, 2)}


def test_convex_hull_starts_at_smallest_vertex_and_ignores_order(rng):
    """Output is canonical regardless of input permutation."""
    points = disk_points(rng, 40)
    hull = convex_hull(points)
    assert hull.vertices[0] == min(hull.vertices)
    shuffled = [points[i] for i in rng.permutation(len(points))]
    assert convex_hull(shuffled) == hull


@pytest.mark.parametrize("points", [
    [(0, 0), (1, 1)],
    [(0, 0), (0, 0), (1, 1), (1, 1)],
    [(0, 0), (1, 1), (2, 2), (3, 3)],
])
def test_convex_hull_degenerate(points):
    """Too few distinct points or collinear input raises DegenerateInput."""
    with pytest.raises(DegenerateInput):
        convex_hull(points)


def test_convex_hull_matches_triangle_oracle(rng):
    """Small instances agree with the brute-force 'not inside any triangle' oracle."""
    for _ in range(100):
        points = disk_points(rng, int(rng.integers(3, 13)))
        assert {tuple(v) for v in convex_hull(points).vertices} == hull_vertices_by_triangles(points)


def test_convex_hull_oracle_equivalence_and_speed(rng):
    """1000 random instances of up to 50 points; vertex sets match the oracle."""
    instances = [disk_points(rng, int(rng.integers(3, 51))) for _ in range(1000)]
    started = time.perf_counter()
    hulls = [convex_hull(points) for points in instances]
    elapsed = time.perf_counter() - started
    assert elapsed < 5.0
    for points, hull in zip(instances, hulls):
        assert {tuple(v) for v in hull.vertices} == hull_vertices_by_edges(points)


def test_convex_hull_properties(rng):
    """Containment, convexity and minimality hold on random input."""
    points = disk_points(rng, 60)
    hull = convex_hull(points)
    assert is_convex(hull)
    assert all(loc is not Location.OUTSIDE for loc in classify_points(points, hull))
    verts = list(hull.vertices)
    for i in range(len(verts)):
        reduced = verts[:i] + verts[i + 1:]
        if len(reduced) < 3:
            continue
        smaller = Polygon.from_vertices(reduced)
        assert any(loc is Location.OUTSIDE for loc in classify_points(points, smaller))


# delaunay_triangulate

def assert_empty_circumcircles(points, triangles):
    for tri in triangles:
        for p in points:
            if p in tri.vertices:
                continue
            assert not tri.circumcircle_contains(p)


def test_delaunay_three_points():
    """Three points force a single triangle."""
    triangles = delaunay_triangulate([(0, 0), (1, 0), (0, 1)])
    assert triangles == (Triangle(Point2(0, 0), Point2(1, 0), Point2(0, 1)),)


def test_delaunay_four_points():
    """A quadrilateral splits into two valid triangles covering its area."""
    points = canonical_points([(0, 0), (2, 0), (1, 1), (1, -1)])
    triangles = delaunay_triangulate(points)
    assert len(triangles) == 2
    assert sum(polygon_area(Polygon.from_vertices(t.vertices)) for t in triangles) == pytest.approx(2.0)
    assert_empty_circumcircles(points, triangles)


def test_delaunay_random_thirty(rng):
    """Every triangle passes the exhaustive empty-circumcircle check."""
    points = disk_points(rng, 30)
    triangles = delaunay_triangulate(points)
    assert_empty_circumcircles(points, triangles)
    total = sum(polygon_area(Polygon.from_vertices(t.vertices)) for t in triangles)
    assert total == pytest.approx(convex_hull(points).area, rel=1e-9)


def test_delaunay_validity_many_instances(rng):
    """200 random instances of up to 50 points are all Delaunay."""
    for _ in range(200):
        points = disk_points(rng, int(rng.integers(3, 51)))
        assert_empty_circumcircles(points, delaunay_triangulate(points))


def test_delaunay_ignores_input_order(rng):
    points = disk_points(rng, 25)
    reversed_points = list(reversed(points))
    assert delaunay_triangulate(points) == delaunay_triangulate(reversed_points)


def test_delaunay_collinear_raises():
    with pytest.raises(DegenerateInput):
        delaunay_triangulate([(0, 0), (1, 0), (2, 0), (3, 0)])


def test_in_circumcircle_predicate():
    a, b, c = (0, 0), (1, 0), (0, 1)
    assert in_circumcircle(a, b, c, (0.5, 0.5))
    assert not in_circumcircle(a, b, c, (2, 2))
    # on the circle itself
    assert not in_circumcircle(a, b, c, (1, 1))


# alpha_shape

def test_alpha_infinite_equals_hull(rng):
    points = disk_points(rng, 40)
    shape = alpha_shape(points, INFINITE)
    assert len(shape) == 1
    assert shape.parts[0] == convex_hull(points)


def test_alpha_two_blobs_two_parts(rng):
    """Edges between blobs 100 m apart exceed alpha, so two parts remain."""
    points = [Point2(*p) for p in np.vstack([blob(rng, (0, 0), 10, sigma=0.5, clip=1.0),
                                             blob(rng, (100, 0), 10, sigma=0.5, clip=1.0)])]
    shape = alpha_shape(points, 5.0)
    assert len(shape) == 2
    assert {part.vertices[0].x < 50 for part in shape.parts} == {True, False}


def test_alpha_c_shape_smaller_than_hull(rng):
    """A concave point set has an alpha area well below its hull area."""
    points = [Point2(*p) for p in c_shape(rng, 400, radius=30.0, width=4.0)]
    hull_area = convex_hull(points).area
    shape = alpha_shape(points, 6.0)
    assert 0 < shape.area < 0.8 * hull_area


def test_alpha_limit_and_monotonicity(rng):
    """Area grows with alpha and reaches the hull area."""
    for _ in range(100):
        points = disk_points(rng, int(rng.integers(5, 41)))
        hull_area = convex_hull(points).area
        assert alpha_shape(points, INFINITE).area == pytest.approx(hull_area, rel=1e-9)
        assert alpha_shape(points, 10.0).area == pytest.approx(hull_area, rel=1e-9)
        areas = [alpha_shape(points, a).area for a in np.linspace(0.05, 2.5, 10)]
        assert all(x <= y * (1 + 1e-9) for x, y in zip(areas, areas[1:]))
        assert areas[-1] <= hull_area * (1 + 1e-9)


def test_alpha_large_finite_has_hull_vertices(rng):
    points = disk_points(rng, 30)
    shape = alpha_shape(points, 100.0)
    assert len(shape) == 1
    assert set(shape.parts[0].vertices) == set(convex_hull(points).vertices)


def test_alpha_everything_filtered_is_empty():
    shape = alpha_shape([(0, 0), (10, 0), (0, 10), (10, 10)], 1.0)
    assert shape.is_empty
    assert shape.area == 0.0


@pytest.mark.parametrize("alpha", [0, -1.0, float("nan")])
def test_alpha_must_be_positive(alpha):
    with pytest.raises(GeometryError):
        alpha_shape([(0, 0), (1, 0), (0, 1)], alpha)


# areas and containment

def test_polygon_area(unit_square):
    assert polygon_area(unit_square) == 1.0
    assert polygon_area(Polygon.from_vertices([(0, 0), (1, 0), (0, 1)])) == 0.5


def test_polygon_area_monte_carlo(rng):
    """Shoelace area agrees with a 10^6-sample containment estimate."""
    polygon = convex_hull(disk_points(rng, 12))
    minx, miny, maxx, maxy = polygon.bounds
    samples = rng.uniform((minx, miny), (maxx, maxy), size=(1_000_000, 2))
    hits = shapely.contains_xy(polygon.to_shapely(), samples[:, 0], samples[:, 1]).mean()
    estimate = hits * (maxx - minx) * (maxy - miny)
    assert polygon_area(polygon) == pytest.approx(estimate, rel=0.01)


def test_point_in_polygon(unit_square):
    assert point_in_polygon((0.5, 0.5), unit_square) is Location.INSIDE
    assert point_in_polygon((2, 2), unit_square) is Location.OUTSIDE
    assert point_in_polygon((1.0, 0.5), unit_square) is Location.BOUNDARY
    assert point_in_polygon((0, 0), unit_square) is Location.BOUNDARY


def test_covered_mask_counts_boundary(unit_square):
    mask = covered_mask([(0.5, 0.5), (1.0, 0.2), (3, 3)], MultiPolygon((unit_square,)))
    assert mask.tolist() == [True, True, False]


def test_convex_intersection_area(unit_square):
    far = Polygon.from_vertices([(10, 10), (11, 10), (11, 11), (10, 11)])
    shifted = Polygon.from_vertices([(0.5, 0), (1.5, 0), (1.5, 1), (0.5, 1)])
    assert convex_intersection_area(unit_square, unit_square) == pytest.approx(1.0)
    assert convex_intersection_area(unit_square, far) == 0.0
    assert convex_intersection_area(unit_square, shifted) == pytest.approx(0.5)


def test_convex_intersection_rejects_concave(unit_square):
    concave = Polygon.from_vertices([(0, 0), (2, 0), (2, 2), (1, 0.5), (0, 2)])
    with pytest.raises(NotConvex):
        convex_intersection_area(concave, unit_square)


# types

def test_ring_rejects_clockwise_and_repeats():
    with pytest.raises(GeometryError):
        Ring((Point2(0, 0), Point2(0, 1), Point2(1, 0)))
    with pytest.raises(DegenerateInput):
        Ring((Point2(0, 0), Point2(1, 0), Point2(0, 0), Point2(0, 1)))


def test_ring_rejects_self_intersection():
    """An uneven bowtie has positive signed area but crosses itself."""
    with pytest.raises(GeometryError, match="intersect"):
        Polygon.from_vertices([(0, 0), (6, 0), (0, 2), (2, 4)])


def test_polygon_from_vertices_is_canonical():
    """Clockwise, closed input is reoriented and rotated."""
    polygon = Polygon.from_vertices([(1, 1), (1, 0), (0, 0), (0, 1), (1, 1)])
    assert polygon.vertices == ((0, 0), (1, 0), (1, 1), (0, 1))
    assert polygon.exterior.is_simple()


def test_point_rejects_non_finite():
    with pytest.raises(GeometryError):
        Point2(math.nan, 0.0)
    with pytest.raises(GeometryError):
        Point2(0.0, math.inf)
