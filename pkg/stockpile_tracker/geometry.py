"""
Geometry module for stockpile_tracker - planar hulls, triangulation and alpha shapes

All coordinates live in a projected metric plane (metres). Functions are pure:
they never mutate their inputs and hold no shared state.
"""

import math
from dataclasses import dataclass
from enum import Enum
from typing import Iterable, List, Sequence, Tuple, Union

import numpy as np
import shapely
from scipy.spatial import Delaunay

from .exceptions import DegenerateInput, GeometryError, NotConvex

# Orientation and in-circle tests compare normalized determinants against this.
PREDICATE_EPS = 1e-12
# Distance below which a point counts as lying on a polygon edge.
BOUNDARY_TOL = 1e-9

INFINITE = math.inf


class Point2(tuple):
    """Planar position (easting, northing) in metres."""

    __slots__ = ()

    def __new__(cls, x: float, y: float):
        x, y = float(x), float(y)
        if not (math.isfinite(x) and math.isfinite(y)):
            raise GeometryError(f"non-finite coordinate ({x}, {y})")
        return super().__new__(cls, (x, y))

    def __getnewargs__(self):
        return (self[0], self[1])

    @property
    def x(self) -> float:
        return self[0]

    @property
    def y(self) -> float:
        return self[1]

    def offset(self, dx: float, dy: float) -> "Point2":
        return Point2(self[0] + dx, self[1] + dy)

    def distance_to(self, other: "Point2") -> float:
        return math.hypot(self[0] - other[0], self[1] - other[1])

    def __repr__(self) -> str:
        return f"Point2({self[0]!r}, {self[1]!r})"


PointLike = Union[Point2, Tuple[float, float], Sequence[float]]


class Location(Enum):
    """Classification of a point against a polygon."""
    INSIDE = "inside"
    BOUNDARY = "boundary"
    OUTSIDE = "outside"


def _cross(o: Point2, a: Point2, b: Point2) -> float:
    return (a[0] - o[0]) * (b[1] - o[1]) - (a[1] - o[1]) * (b[0] - o[0])


def orientation(a: PointLike, b: PointLike, c: PointLike) -> int:
    """Return +1 for a left turn a→b→c, -1 for a right turn, 0 if collinear.

    The cross product is normalized by the lengths of both legs, so the
    threshold is scale-free (it is the sine of the turning angle).
    """
    cross = (b[0] - a[0]) * (c[1] - a[1]) - (b[1] - a[1]) * (c[0] - a[0])
    scale = math.hypot(b[0] - a[0], b[1] - a[1]) * math.hypot(c[0] - a[0], c[1] - a[1])
    if scale == 0.0:
        return 0
    value = cross / scale
    if abs(value) <= PREDICATE_EPS:
        return 0
    return 1 if value > 0 else -1


def in_circumcircle(a: PointLike, b: PointLike, c: PointLike, d: PointLike) -> bool:
    """True if d lies strictly inside the circumcircle of the CCW triangle abc."""
    rows = []
    for p in (a, b, c):
        dx, dy = p[0] - d[0], p[1] - d[1]
        rows.append((dx, dy, dx * dx + dy * dy))
    det = (
        rows[0][0] * (rows[1][1] * rows[2][2] - rows[2][1] * rows[1][2])
        - rows[0][1] * (rows[1][0] * rows[2][2] - rows[2][0] * rows[1][2])
        + rows[0][2] * (rows[1][0] * rows[2][1] - rows[2][0] * rows[1][1])
    )
    scale = max(abs(r[2]) for r in rows) ** 2
    if scale == 0.0:
        return False
    return det / scale > PREDICATE_EPS


def canonical_points(points: Iterable[PointLike]) -> List[Point2]:
    """Deduplicate and sort points lexicographically."""
    return sorted({Point2(p[0], p[1]) for p in points})


def _shoelace(vertices: Sequence[PointLike]) -> float:
    coords = np.asarray(vertices, dtype=float)
    x, y = coords[:, 0], coords[:, 1]
    return 0.5 * float(np.dot(x, np.roll(y, -1)) - np.dot(y, np.roll(x, -1)))


@dataclass(frozen=True)
class Ring:
    """Closed CCW boundary; closure is implicit (first vertex not repeated)."""
    vertices: Tuple[Point2, ...]

    def __post_init__(self):
        if len(set(self.vertices)) < 3 or len(set(self.vertices)) != len(self.vertices):
            raise DegenerateInput("a ring needs at least 3 distinct, non-repeated vertices")
        if _shoelace(self.vertices) <= 0.0:
            raise GeometryError("ring must be counter-clockwise with positive area")
        if not self.is_simple():
            raise GeometryError("ring must not intersect itself")

    def __len__(self) -> int:
        return len(self.vertices)

    def edges(self) -> List[Tuple[Point2, Point2]]:
        n = len(self.vertices)
        return [(self.vertices[i], self.vertices[(i + 1) % n]) for i in range(n)]

    def is_simple(self) -> bool:
        return bool(shapely.LinearRing(self.vertices).is_simple)


@dataclass(frozen=True)
class Polygon:
    """Simple polygon without holes."""
    exterior: Ring

    @classmethod
    def from_vertices(cls, vertices: Sequence[PointLike]) -> "Polygon":
        """Build a canonical polygon: CCW, closure dropped, starting at the smallest vertex."""
        pts = [Point2(p[0], p[1]) for p in vertices]
        if len(pts) > 1 and pts[0] == pts[-1]:
            pts = pts[:-1]
        if len(pts) >= 3 and _shoelace(pts) < 0.0:
            pts.reverse()
        if pts:
            start = pts.index(min(pts))
            pts = pts[start:] + pts[:start]
        return cls(Ring(tuple(pts)))

    @property
    def vertices(self) -> Tuple[Point2, ...]:
        return self.exterior.vertices

    @property
    def area(self) -> float:
        return polygon_area(self)

    @property
    def bounds(self) -> Tuple[float, float, float, float]:
        coords = np.asarray(self.vertices)
        return (float(coords[:, 0].min()), float(coords[:, 1].min()),
                float(coords[:, 0].max()), float(coords[:, 1].max()))

    def to_shapely(self) -> shapely.Polygon:
        return shapely.Polygon(self.vertices)


@dataclass(frozen=True)
class MultiPolygon:
    """Interior-disjoint polygon parts; an empty instance is the empty shape."""
    parts: Tuple[Polygon, ...] = ()

    def __len__(self) -> int:
        return len(self.parts)

    def __iter__(self):
        return iter(self.parts)

    @property
    def is_empty(self) -> bool:
        return not self.parts

    @property
    def area(self) -> float:
        return sum(part.area for part in self.parts)


@dataclass(frozen=True, order=True)
class Triangle:
    """Non-degenerate CCW triangle."""
    a: Point2
    b: Point2
    c: Point2

    def __post_init__(self):
        if orientation(self.a, self.b, self.c) <= 0:
            raise DegenerateInput("triangle must be non-degenerate and counter-clockwise")

    @property
    def vertices(self) -> Tuple[Point2, Point2, Point2]:
        return (self.a, self.b, self.c)

    def edge_lengths(self) -> Tuple[float, float, float]:
        return (self.a.distance_to(self.b), self.b.distance_to(self.c), self.c.distance_to(self.a))

    def circumcircle_contains(self, p: PointLike) -> bool:
        return in_circumcircle(self.a, self.b, self.c, p)


def check_alpha(alpha: float) -> float:
    """Validate an alpha parameter (maximum kept edge length, or INFINITE)."""
    alpha = float(alpha)
    if math.isnan(alpha) or alpha <= 0.0:
        raise GeometryError(f"alpha must be > 0 or INFINITE, got {alpha}")
    return alpha


def _require_polygonal(points: Iterable[PointLike]) -> List[Point2]:
    pts = canonical_points(points)
    if len(pts) < 3:
        raise DegenerateInput(f"need at least 3 distinct points, got {len(pts)}")
    return pts


def convex_hull(points: Iterable[PointLike]) -> Polygon:
    """Strict convex hull by monotone chain.

    Collinear boundary points are dropped. The ring is CCW and starts at the
    lexicographically smallest vertex.
    """
    pts = _require_polygonal(points)

    lower: List[Point2] = []
    for p in pts:
        while len(lower) >= 2 and orientation(lower[-2], lower[-1], p) <= 0:
            lower.pop()
        lower.append(p)

    upper: List[Point2] = []
    for p in reversed(pts):
        while len(upper) >= 2 and orientation(upper[-2], upper[-1], p) <= 0:
            upper.pop()
        upper.append(p)

    hull = lower[:-1] + upper[:-1]
    if len(hull) < 3:
        raise DegenerateInput("all points are collinear")
    return Polygon(Ring(tuple(hull)))


def delaunay_triangulate(points: Iterable[PointLike]) -> Tuple[Triangle, ...]:
    """Delaunay triangulation of the distinct input points.

    Points are sorted before triangulating so the result does not depend on
    input order; each triangle is rotated to start at its lowest point index
    and the output is sorted.
    """
    pts = _require_polygonal(points)
    convex_hull(pts)  # raises on collinear input

    simplices = Delaunay(np.asarray(pts, dtype=float)).simplices
    triangles = []
    for simplex in simplices:
        i, j, k = sorted(int(v) for v in simplex)
        a, b, c = pts[i], pts[j], pts[k]
        turn = orientation(a, b, c)
        if turn == 0:
            continue
        if turn < 0:
            b, c = c, b
        triangles.append(Triangle(a, b, c))
    return tuple(sorted(triangles))


def _drop_collinear(vertices: List[Point2]) -> List[Point2]:
    changed = True
    while changed and len(vertices) > 3:
        changed = False
        for i in range(len(vertices)):
            prev, cur, nxt = vertices[i - 1], vertices[i], vertices[(i + 1) % len(vertices)]
            if orientation(prev, cur, nxt) == 0:
                del vertices[i]
                changed = True
                break
    return vertices


def alpha_shape(points: Iterable[PointLike], alpha: float) -> MultiPolygon:
    """Union of Delaunay triangles whose three edges are all <= alpha.

    alpha is a maximum edge length in metres; INFINITE gives the convex hull.
    Holes are filled, and parts nested inside another part's filled outline
    are absorbed by it. Returns an empty MultiPolygon when every triangle is
    filtered out.
    """
    alpha = check_alpha(alpha)
    pts = _require_polygonal(points)
    if math.isinf(alpha):
        return MultiPolygon((convex_hull(pts),))

    kept = [t for t in delaunay_triangulate(pts) if max(t.edge_lengths()) <= alpha]
    if not kept:
        return MultiPolygon(())

    union = shapely.union_all([shapely.Polygon(t.vertices) for t in kept])
    outlines = [shapely.Polygon(g.exterior) for g in getattr(union, "geoms", [union]) if g.area > 0.0]
    outlines.sort(key=lambda g: g.area, reverse=True)

    accepted: List[shapely.Polygon] = []
    for outline in outlines:
        if any(outer.contains(outline.representative_point()) for outer in accepted):
            continue
        accepted.append(outline)

    parts = []
    for outline in accepted:
        ring = _drop_collinear([Point2(x, y) for x, y in outline.exterior.coords[:-1]])
        parts.append(Polygon.from_vertices(ring))
    parts.sort(key=lambda p: p.vertices[0])
    return MultiPolygon(tuple(parts))


def polygon_area(polygon: Polygon) -> float:
    """Shoelace area in square metres."""
    return _shoelace(polygon.vertices)


def classify_points(points: Sequence[PointLike], polygon: Polygon) -> List[Location]:
    """Vectorized point_in_polygon over many points."""
    if len(points) == 0:
        return []
    coords = np.asarray([(p[0], p[1]) for p in points], dtype=float)
    shape = polygon.to_shapely()
    on_edge = shapely.distance(shape.exterior, shapely.points(coords)) <= BOUNDARY_TOL
    inside = shapely.contains_xy(shape, coords[:, 0], coords[:, 1])
    return [
        Location.BOUNDARY if edge else (Location.INSIDE if within else Location.OUTSIDE)
        for edge, within in zip(on_edge, inside)
    ]


def point_in_polygon(q: PointLike, polygon: Polygon) -> Location:
    """Classify q as inside, on the boundary of, or outside polygon."""
    return classify_points([q], polygon)[0]


def covered_mask(points: Sequence[PointLike], shape: MultiPolygon) -> np.ndarray:
    """Boolean mask of points inside-or-boundary of any part of shape."""
    mask = np.zeros(len(points), dtype=bool)
    for part in shape.parts:
        mask |= np.array([loc is not Location.OUTSIDE for loc in classify_points(points, part)], dtype=bool)
    return mask


def is_convex(polygon: Polygon) -> bool:
    verts = polygon.vertices
    n = len(verts)
    return all(orientation(verts[i - 1], verts[i], verts[(i + 1) % n]) >= 0 for i in range(n))


def convex_intersection_area(a: Polygon, b: Polygon) -> float:
    """Area of a ∩ b for two convex polygons; 0 when disjoint."""
    for name, polygon in (("a", a), ("b", b)):
        if not is_convex(polygon):
            raise NotConvex(f"polygon {name} is not convex")
    return float(a.to_shapely().intersection(b.to_shapely()).area)
