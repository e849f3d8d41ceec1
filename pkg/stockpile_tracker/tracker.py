"""
Tracker module for stockpile_tracker - windowed dump/reclaim polygons and the
dump ledger with reclaim subtraction

run_algorithm1 builds independent per-window polygons for a dump-only or
reclaim-only stream. run_algorithm2 threads a DumpLedger through the windows:
new dump points are added, points covered by the window's reclaim polygon
(bucket positions, or offset digger positions when no bucket data exists) are
removed, and dump polygons are rebuilt from what remains.
"""

import logging
import math
from dataclasses import dataclass, field, replace
from datetime import datetime, timedelta
from enum import Enum
from typing import Iterator, List, Optional, Sequence, Tuple

import numpy as np
from pydantic import Field, model_validator
from tqdm import tqdm

from .clustering import DbscanParams, dbscan
from .config import ValidatedModel
from .events import (DEFAULT_STATIONARY_SPEED, EventKind, EventStream, TelemetryRecord,
                     Window, WindowSpec, slice_window)
from .exceptions import ConfigError, DegenerateInput, DegenerateReclaim, StockpileError
from .geometry import (INFINITE, MultiPolygon, Point2, Polygon, alpha_shape,
                       convex_hull, convex_intersection_area, covered_mask)

logger = logging.getLogger(__name__)

DEFAULT_EPS_M = 10.0
DEFAULT_MIN_PTS = 4
DEFAULT_DUMP_WINDOW = timedelta(hours=2)
DEFAULT_RECLAIM_WINDOW = timedelta(minutes=30)
DEFAULT_LEDGER_WINDOW = timedelta(hours=24)


class PolygonKind(str, Enum):
    CONVEX = "convex"
    ALPHA = "alpha"


class Role(str, Enum):
    DUMP = "dump"
    RECLAIM = "reclaim"


class Source(str, Enum):
    TRUCK = "truck"
    BUCKET = "bucket"
    DIGGER = "digger"


class Mode(str, Enum):
    """Input selection for run_algorithm1"""
    DUMP_ONLY = "dump"
    RECLAIM_ONLY = "reclaim"


class PolygonModel(ValidatedModel):
    """Polygon construction used for every cluster: convex hull or alpha shape.

    alpha is the longest Delaunay edge kept, in metres (inf gives the hull).
    """
    kind: PolygonKind = PolygonKind.CONVEX
    alpha: float = INFINITE

    @model_validator(mode="after")
    def _check_alpha(self) -> "PolygonModel":
        if self.kind is PolygonKind.ALPHA and (math.isnan(self.alpha) or self.alpha <= 0):
            raise ValueError(f"alpha must be > 0 (or inf), got {self.alpha}")
        return self

    @property
    def label(self) -> str:
        if self.kind is PolygonKind.CONVEX:
            return "convex"
        return "alpha(inf)" if math.isinf(self.alpha) else f"alpha({self.alpha:g})"

    def build(self, points: Sequence[Point2]) -> MultiPolygon:
        """Raises DegenerateInput for < 3 distinct or collinear points."""
        if self.kind is PolygonKind.CONVEX:
            return MultiPolygon((convex_hull(points),))
        return alpha_shape(points, self.alpha)


def _default_dbscan() -> DbscanParams:
    return DbscanParams(eps=DEFAULT_EPS_M, min_pts=DEFAULT_MIN_PTS)


class TrackerConfig(ValidatedModel):
    window: WindowSpec
    model: PolygonModel = Field(default_factory=PolygonModel)
    dump_dbscan: DbscanParams = Field(default_factory=_default_dbscan)
    reclaim_dbscan: DbscanParams = Field(default_factory=_default_dbscan)
    digger_offset: Tuple[float, float] = (0.0, 0.0)
    stationary_speed: float = Field(default=DEFAULT_STATIONARY_SPEED, ge=0, allow_inf_nan=False)
    min_polygon_points: int = Field(default=3, ge=3)
    # When False, digger positions never remove dumps (diagnostic comparison).
    digger_fallback: bool = True
    # Build a digger reclaim polygon alongside the bucket one, for display only.
    compare_digger: bool = False

    @model_validator(mode="after")
    def _finite_offset(self) -> "TrackerConfig":
        if not all(math.isfinite(v) for v in self.digger_offset):
            raise ValueError("digger_offset must be finite")
        return self


@dataclass(frozen=True)
class PolygonFeature:
    polygon: Polygon
    role: Role
    source: Source
    window_index: int
    cluster_id: int
    area_m2: float
    # Reclaim polygon reported for comparison only; it removed nothing.
    comparison: bool = False


@dataclass(frozen=True)
class Snapshot:
    """Output of one window."""
    window: Window
    dump_features: Tuple[PolygonFeature, ...] = ()
    reclaim_features: Tuple[PolygonFeature, ...] = ()
    comparison_features: Tuple[PolygonFeature, ...] = ()
    degenerate_clusters: int = 0
    empty_shapes: int = 0
    removed_this_window: int = 0
    reclaim_skipped: bool = False
    dump_overlap_m2: Optional[float] = None
    ledger_active: Optional[int] = None
    ledger_removed_total: Optional[int] = None
    error: Optional[str] = None

    @property
    def features(self) -> Tuple[PolygonFeature, ...]:
        return self.dump_features + self.reclaim_features + self.comparison_features


@dataclass(frozen=True)
class LedgerPoint:
    position: Point2
    timestamp: datetime
    window_added: int
    cluster_at_add: int
    equipment_id: str = ""


@dataclass(frozen=True)
class DumpLedger:
    """Active dump points carried across windows.

    Conservation: added_total == len(active) + removed_total.
    """
    active: Tuple[LedgerPoint, ...] = ()
    removed_total: int = 0
    added_total: int = 0

    def __len__(self) -> int:
        return len(self.active)

    def positions(self) -> List[Point2]:
        return [p.position for p in self.active]

    def add(self, points: Sequence[LedgerPoint]) -> "DumpLedger":
        return replace(self, active=self.active + tuple(points),
                       added_total=self.added_total + len(points))

    def remove(self, mask: np.ndarray) -> Tuple["DumpLedger", int]:
        """Drop the active points flagged in mask; returns (ledger, removed count)."""
        keep = tuple(p for p, hit in zip(self.active, mask) if not hit)
        removed = len(self.active) - len(keep)
        return replace(self, active=keep, removed_total=self.removed_total + removed), removed


@dataclass(frozen=True)
class WindowEvents:
    """Truck dumps, bucket reclaims and digger positions sliced to one window."""
    dumps: Tuple[TelemetryRecord, ...] = ()
    buckets: Tuple[TelemetryRecord, ...] = ()
    diggers: Tuple[TelemetryRecord, ...] = ()


@dataclass(frozen=True)
class TrackerStreams:
    dumps: EventStream = field(default_factory=EventStream)
    buckets: EventStream = field(default_factory=EventStream)
    diggers: EventStream = field(default_factory=EventStream)

    def window_events(self, window: Window) -> WindowEvents:
        return WindowEvents(
            dumps=tuple(slice_window(self.dumps, window)),
            buckets=tuple(slice_window(self.buckets, window)),
            diggers=tuple(slice_window(self.diggers, window)),
        )


def _cluster_features(positions: Sequence[Point2], params: DbscanParams, cfg: TrackerConfig,
                      role: Role, source: Source, window_index: int
                      ) -> Tuple[Tuple[PolygonFeature, ...], int, int]:
    """Cluster positions and wrap each cluster; returns (features, degenerate, empty)."""
    assignment = dbscan(positions, params)
    features: List[PolygonFeature] = []
    degenerate = empty = 0
    for cluster_id, members in enumerate(assignment.clusters()):
        if len(members) < cfg.min_polygon_points:
            degenerate += 1
            continue
        try:
            shape = cfg.model.build([positions[i] for i in members])
        except DegenerateInput:
            degenerate += 1
            continue
        if shape.is_empty:
            empty += 1
            continue
        for part in shape.parts:
            features.append(PolygonFeature(part, role, source, window_index, cluster_id, part.area))
    return tuple(features), degenerate, empty


def _dump_overlap(features: Sequence[PolygonFeature], cfg: TrackerConfig) -> Optional[float]:
    if cfg.model.kind is not PolygonKind.CONVEX:
        return None
    total = 0.0
    for i, first in enumerate(features):
        for second in features[i + 1:]:
            total += convex_intersection_area(first.polygon, second.polygon)
    return total


def run_algorithm1(stream: EventStream, cfg: TrackerConfig, mode: Mode,
                   progress: bool = False) -> List[Snapshot]:
    """Independent per-window polygons for a dump-only or reclaim-only stream."""
    if not isinstance(cfg, TrackerConfig):
        raise ConfigError("cfg must be a TrackerConfig")
    if mode is Mode.DUMP_ONLY:
        kind, params, role, source = EventKind.TRUCK_GPS, cfg.dump_dbscan, Role.DUMP, Source.TRUCK
    else:
        kind, params, role, source = (EventKind.BUCKET_RECLAIM, cfg.reclaim_dbscan,
                                      Role.RECLAIM, Source.BUCKET)
    stream = stream.of_kind(kind)

    snapshots = []
    for window in tqdm(cfg.window.windows(), desc="algorithm 1", unit="window", disable=not progress):
        positions = [r.position for r in slice_window(stream, window)]
        features, degenerate, empty = _cluster_features(positions, params, cfg, role, source, window.index)
        if role is Role.DUMP:
            snapshot = Snapshot(window, dump_features=features, degenerate_clusters=degenerate,
                                empty_shapes=empty, dump_overlap_m2=_dump_overlap(features, cfg))
        else:
            snapshot = Snapshot(window, reclaim_features=features, degenerate_clusters=degenerate,
                                empty_shapes=empty)
        logger.debug("window %d: %d events, %d features", window.index, len(positions), len(features))
        snapshots.append(snapshot)
    return snapshots


def _reclaim_shape(positions: Sequence[Point2], cfg: TrackerConfig, window_index: int) -> MultiPolygon:
    try:
        shape = cfg.model.build(positions)
    except DegenerateInput as exc:
        raise DegenerateReclaim(window_index, str(exc)) from exc
    if shape.is_empty:
        raise DegenerateReclaim(window_index, "reclaim alpha shape is empty")
    return shape


def _reclaim_features(shape: MultiPolygon, source: Source, window_index: int,
                      comparison: bool = False) -> Tuple[PolygonFeature, ...]:
    return tuple(PolygonFeature(part, Role.RECLAIM, source, window_index, 0, part.area, comparison)
                 for part in shape.parts)


def step_algorithm2(ledger: DumpLedger, events: WindowEvents, cfg: TrackerConfig,
                    window: Window) -> Tuple[DumpLedger, Snapshot]:
    """Advance the dump ledger by one window.

    New dump points always join the ledger. Bucket positions, if any, form the
    reclaim polygon; otherwise digger positions shifted by cfg.digger_offset do,
    unless cfg.digger_fallback is off. Ledger points inside or on the reclaim
    polygon are removed, then the remainder is re-clustered into dump polygons.
    Reclaim positions that cannot form a polygon skip the removal and set
    reclaim_skipped on the snapshot.
    """
    dump_positions = [r.position for r in events.dumps]
    batch = dbscan(dump_positions, cfg.dump_dbscan).labels if dump_positions else ()
    ledger = ledger.add([
        LedgerPoint(r.position, r.timestamp, window.index, label, r.equipment_id)
        for r, label in zip(events.dumps, batch)
    ])

    bucket_positions = [r.position for r in events.buckets]
    dx, dy = cfg.digger_offset
    digger_positions = [r.position.offset(dx, dy) for r in events.diggers]

    if bucket_positions:
        source, reclaim_positions = Source.BUCKET, bucket_positions
    elif digger_positions and cfg.digger_fallback:
        source, reclaim_positions = Source.DIGGER, digger_positions
    else:
        source, reclaim_positions = None, []

    reclaim: Tuple[PolygonFeature, ...] = ()
    removed = 0
    skipped = False
    if source is not None:
        try:
            shape = _reclaim_shape(reclaim_positions, cfg, window.index)
        except DegenerateReclaim as exc:
            logger.warning("%s", exc)
            skipped = True
        else:
            ledger, removed = ledger.remove(covered_mask(ledger.positions(), shape))
            reclaim = _reclaim_features(shape, source, window.index)

    comparison: Tuple[PolygonFeature, ...] = ()
    if cfg.compare_digger and bucket_positions and digger_positions:
        try:
            comparison = _reclaim_features(_reclaim_shape(digger_positions, cfg, window.index),
                                           Source.DIGGER, window.index, comparison=True)
        except DegenerateReclaim as exc:
            logger.debug("comparison polygon not built: %s", exc)

    dumps, degenerate, empty = _cluster_features(ledger.positions(), cfg.dump_dbscan, cfg,
                                                 Role.DUMP, Source.TRUCK, window.index)
    snapshot = Snapshot(
        window,
        dump_features=dumps,
        reclaim_features=reclaim,
        comparison_features=comparison,
        degenerate_clusters=degenerate,
        empty_shapes=empty,
        removed_this_window=removed,
        reclaim_skipped=skipped,
        dump_overlap_m2=_dump_overlap(dumps, cfg),
        ledger_active=len(ledger),
        ledger_removed_total=ledger.removed_total,
    )
    logger.debug("window %d: +%d dumps, -%d reclaimed, %d active",
                 window.index, len(events.dumps), removed, len(ledger))
    return ledger, snapshot


def iter_algorithm2(streams: TrackerStreams, cfg: TrackerConfig, ledger: Optional[DumpLedger] = None,
                    progress: bool = False) -> Iterator[Tuple[DumpLedger, Snapshot]]:
    """Fold step_algorithm2 over cfg's windows, yielding the ledger after each one.

    A window that fails keeps the ledger as it was and yields a snapshot with
    error set; later windows still run.
    """
    if ledger is None:
        ledger = DumpLedger()
    for window in tqdm(cfg.window.windows(), desc="algorithm 2", unit="window", disable=not progress):
        events = streams.window_events(window)
        try:
            ledger, snapshot = step_algorithm2(ledger, events, cfg, window)
        except StockpileError as exc:
            logger.error("window %d failed: %s", window.index, exc)
            snapshot = Snapshot(window, ledger_active=len(ledger),
                                ledger_removed_total=ledger.removed_total, error=str(exc))
        yield ledger, snapshot


def run_algorithm2(streams: TrackerStreams, cfg: TrackerConfig, progress: bool = False) -> List[Snapshot]:
    """Dump ledger tracking over every window of cfg.window, in order."""
    if not isinstance(cfg, TrackerConfig):
        raise ConfigError("cfg must be a TrackerConfig")
    return [snapshot for _, snapshot in iter_algorithm2(streams, cfg, progress=progress)]
