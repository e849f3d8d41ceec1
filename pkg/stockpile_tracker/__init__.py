"""
stockpile_tracker - Reconstruct in-pit stockpile footprints from GPS telemetry

Dump and reclaim events are grouped per time window with DBSCAN, wrapped in
convex-hull or alpha-shape polygons, and tracked through a dump ledger from
which reclaim polygons remove covered material.
"""

__version__ = "0.1.0"

from .clustering import ClusterAssignment, DbscanParams, NOISE, dbscan
from .events import (EventKind, EventStream, TelemetryRecord, Window, WindowSpec,
                     filter_stationary_dumps, load_csv, slice_window)
from .exceptions import (ConfigError, DegenerateInput, DegenerateReclaim, GeometryError,
                         NotConvex, SchemaError, StockpileError)
from .geometry import (INFINITE, Location, MultiPolygon, Point2, Polygon, Ring, Triangle,
                       alpha_shape, convex_hull, convex_intersection_area, delaunay_triangulate,
                       point_in_polygon, polygon_area)
from .tracker import (DumpLedger, LedgerPoint, Mode, PolygonFeature, PolygonKind, PolygonModel,
                      Role, Snapshot, Source, TrackerConfig, TrackerStreams, WindowEvents,
                      iter_algorithm2, run_algorithm1, run_algorithm2, step_algorithm2)

__all__ = [
    "ClusterAssignment", "DbscanParams", "NOISE", "dbscan",
    "EventKind", "EventStream", "TelemetryRecord", "Window", "WindowSpec",
    "filter_stationary_dumps", "load_csv", "slice_window",
    "ConfigError", "DegenerateInput", "DegenerateReclaim", "GeometryError",
    "NotConvex", "SchemaError", "StockpileError",
    "INFINITE", "Location", "MultiPolygon", "Point2", "Polygon", "Ring", "Triangle",
    "alpha_shape", "convex_hull", "convex_intersection_area", "delaunay_triangulate",
    "point_in_polygon", "polygon_area",
    "DumpLedger", "LedgerPoint", "Mode", "PolygonFeature", "PolygonKind", "PolygonModel",
    "Role", "Snapshot", "Source", "TrackerConfig", "TrackerStreams", "WindowEvents",
    "iter_algorithm2", "run_algorithm1", "run_algorithm2", "step_algorithm2",
]
