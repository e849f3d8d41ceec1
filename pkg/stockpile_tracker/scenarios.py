"""
Synthetic stockpile scenarios

Deterministic (seeded) telemetry for exercising the tracker and the CLI:
window-by-window growth, dump/reclaim cycles with bucket, digger or missing
reclaim data, and overlapping high-side/low-side dump footprints.
"""

from dataclasses import dataclass, field
from datetime import datetime, timedelta, timezone
from functools import partial
from typing import Callable, Dict, List, Optional, Tuple

import numpy as np

from .events import EventKind, EventStream, TelemetryRecord, WindowSpec
from .geometry import Point2
from .tracker import DEFAULT_DUMP_WINDOW, DEFAULT_LEDGER_WINDOW, TrackerStreams

EPOCH = datetime(2019, 3, 1, tzinfo=timezone.utc)
EVENT_SPACING = timedelta(minutes=1)


@dataclass(frozen=True)
class Scenario:
    name: str
    start: datetime
    window: timedelta
    n_windows: int
    dumps: EventStream = field(default_factory=EventStream)
    buckets: EventStream = field(default_factory=EventStream)
    diggers: EventStream = field(default_factory=EventStream)

    @property
    def window_spec(self) -> WindowSpec:
        return WindowSpec(t0=self.start, dt=self.window, ts=self.start + self.n_windows * self.window)

    def streams(self) -> TrackerStreams:
        return TrackerStreams(self.dumps, self.buckets, self.diggers)


def blob(rng: np.random.Generator, center: Tuple[float, float], n: int,
         sigma: float = 1.0, clip: Optional[float] = None) -> np.ndarray:
    """n Gaussian points around center, optionally pulled back inside radius clip."""
    offsets = rng.normal(0.0, sigma, size=(n, 2))
    if clip is not None:
        norms = np.linalg.norm(offsets, axis=1, keepdims=True)
        offsets = np.where(norms > clip, offsets * (clip / np.maximum(norms, 1e-12)), offsets)
    return offsets + np.asarray(center, dtype=float)


def c_shape(rng: np.random.Generator, n: int, radius: float = 30.0, width: float = 4.0,
            center: Tuple[float, float] = (0.0, 0.0)) -> np.ndarray:
    """Points on three quarters of an annulus (opening towards +x)."""
    angles = rng.uniform(0.25 * np.pi, 1.75 * np.pi, size=n)
    radii = rng.uniform(radius - width / 2, radius + width / 2, size=n)
    return np.column_stack((center[0] + radii * np.cos(angles), center[1] + radii * np.sin(angles)))


def ring(center: Tuple[float, float], radius: float, n: int) -> np.ndarray:
    angles = np.linspace(0.0, 2 * np.pi, n, endpoint=False)
    return np.column_stack((center[0] + radius * np.cos(angles), center[1] + radius * np.sin(angles)))


def to_records(points: np.ndarray, kind: EventKind, start: datetime, equipment: List[str],
               speed: Optional[float] = None) -> List[TelemetryRecord]:
    """One record per point, EVENT_SPACING apart from start, cycling equipment ids."""
    return [
        TelemetryRecord(
            timestamp=start + i * EVENT_SPACING,
            equipment_id=equipment[i % len(equipment)],
            kind=kind,
            position=Point2(x, y),
            speed=speed,
        )
        for i, (x, y) in enumerate(points)
    ]


TRUCKS = ["truck-01", "truck-02", "truck-03", "truck-04"]
LOADER = ["loader-01"]


def growth(seed: int = 0, windows: int = 15, points_per_window: int = 12,
           spacing: float = 25.0, window: timedelta = DEFAULT_DUMP_WINDOW) -> Scenario:
    """A fresh, well separated dump blob in every window."""
    rng = np.random.default_rng(seed)
    records: List[TelemetryRecord] = []
    for i in range(windows):
        points = blob(rng, (i * spacing, 0.0), points_per_window, sigma=1.5, clip=4.0)
        records += to_records(points, EventKind.TRUCK_GPS, EPOCH + i * window, TRUCKS, speed=0.0)
    return Scenario("growth", EPOCH, window, windows, dumps=EventStream(tuple(records)))


def dump_reclaim(seed: int = 0, reclaim: str = "bucket",
                 window: timedelta = DEFAULT_LEDGER_WINDOW) -> Scenario:
    """Dump 20, reclaim around them, dump 15 elsewhere, over three windows.

    reclaim selects the reclaim telemetry of the middle window: "bucket",
    "digger", "both" (same positions from both sources) or "none".
    """
    if reclaim not in ("bucket", "digger", "both", "none"):
        raise ValueError(f"unknown reclaim source {reclaim!r}")
    rng = np.random.default_rng(seed)
    first = blob(rng, (0.0, 0.0), 20, sigma=1.0, clip=3.0)
    third = blob(rng, (60.0, 0.0), 15, sigma=1.0, clip=3.0)
    dig = ring((0.0, 0.0), 8.0, 12)

    dumps = (to_records(first, EventKind.TRUCK_GPS, EPOCH, TRUCKS, speed=0.0)
             + to_records(third, EventKind.TRUCK_GPS, EPOCH + 2 * window, TRUCKS, speed=0.0))
    buckets = (to_records(dig, EventKind.BUCKET_RECLAIM, EPOCH + window, LOADER)
               if reclaim in ("bucket", "both") else [])
    diggers = (to_records(dig, EventKind.DIGGER_GPS, EPOCH + window, LOADER)
               if reclaim in ("digger", "both") else [])
    return Scenario(f"dump-reclaim-{reclaim}", EPOCH, window, 3,
                    dumps=EventStream(tuple(dumps)),
                    buckets=EventStream(tuple(buckets)),
                    diggers=EventStream(tuple(diggers)))


def overlap(seed: int = 0, window: timedelta = DEFAULT_LEDGER_WINDOW) -> Scenario:
    """High-side dumps along an arc enclosing a separate low-side mound.

    The two DBSCAN clusters stay apart, but their convex hulls intersect.
    """
    rng = np.random.default_rng(seed)
    high = c_shape(rng, 150, radius=30.0, width=2.0)
    low = blob(rng, (0.0, 0.0), 20, sigma=1.0, clip=3.0)
    records = (to_records(high, EventKind.TRUCK_GPS, EPOCH, TRUCKS, speed=0.0)
               + to_records(low, EventKind.TRUCK_GPS, EPOCH + timedelta(hours=2), TRUCKS, speed=0.0))
    return Scenario("overlap", EPOCH, window, 1, dumps=EventStream(tuple(records)))


SCENARIOS: Dict[str, Callable[..., Scenario]] = {
    "growth": growth,
    "dump-reclaim": partial(dump_reclaim, reclaim="bucket"),
    "digger-fallback": partial(dump_reclaim, reclaim="digger"),
    "bucket-and-digger": partial(dump_reclaim, reclaim="both"),
    "no-reclaim": partial(dump_reclaim, reclaim="none"),
    "overlap": overlap,
}
