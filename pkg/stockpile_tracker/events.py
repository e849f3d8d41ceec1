"""
Events module for stockpile_tracker - telemetry ingestion, stationary-dump
filtering and half-open time windowing
"""

import bisect
import logging
import math
from dataclasses import dataclass, field, replace
from datetime import datetime, timedelta, timezone
from enum import Enum
from pathlib import Path
from typing import Dict, Iterable, List, Optional, Sequence, Tuple, Union

import pandas as pd
from pydantic import AwareDatetime, field_validator, model_validator

from .config import ValidatedModel
from .exceptions import SchemaError
from .geometry import Point2

logger = logging.getLogger(__name__)

COLUMNS = ("timestamp", "equipment_id", "kind", "x", "y", "speed_mps")

DEFAULT_STATIONARY_SPEED = 0.3  # m/s
STILLNESS_INTERVAL = timedelta(seconds=10)
STILLNESS_RADIUS = 1.0  # m

_OVERLONG = "\x00overlong:"


class EventKind(str, Enum):
    """Telemetry event types"""
    TRUCK_GPS = "truck_gps"
    BUCKET_RECLAIM = "bucket_reclaim"
    DIGGER_GPS = "digger_gps"


@dataclass(frozen=True)
class TelemetryRecord:
    """One timestamped position report. speed is only meaningful for trucks."""
    timestamp: datetime
    equipment_id: str
    kind: EventKind
    position: Point2
    speed: Optional[float] = None


@dataclass(frozen=True)
class ParseError:
    """A rejected CSV row; line numbers count the header as line 1."""
    line: int
    reason: str


@dataclass(frozen=True)
class EventStream:
    """Records sorted by timestamp (stable on ties), plus ingestion rejects."""
    records: Tuple[TelemetryRecord, ...] = ()
    rejects: Tuple[ParseError, ...] = ()
    _times: Tuple[datetime, ...] = field(default=(), init=False, repr=False, compare=False)

    def __post_init__(self):
        ordered = tuple(sorted(self.records, key=lambda r: r.timestamp))
        object.__setattr__(self, "records", ordered)
        object.__setattr__(self, "rejects", tuple(self.rejects))
        object.__setattr__(self, "_times", tuple(r.timestamp for r in ordered))

    def __len__(self) -> int:
        return len(self.records)

    def __iter__(self):
        return iter(self.records)

    def of_kind(self, kind: EventKind) -> "EventStream":
        return EventStream(tuple(r for r in self.records if r.kind is kind), self.rejects)

    def span(self) -> Optional[Tuple[datetime, datetime]]:
        """First and last timestamp, or None for an empty stream."""
        if not self.records:
            return None
        return self._times[0], self._times[-1]

    def positions(self) -> List[Point2]:
        return [r.position for r in self.records]


def _utc(value: datetime) -> datetime:
    return value.astimezone(timezone.utc)


@dataclass(frozen=True)
class Window:
    """Half-open interval [start, end)"""
    index: int
    start: datetime
    end: datetime

    def contains(self, t: datetime) -> bool:
        return self.start <= t < self.end


class WindowSpec(ValidatedModel):
    """Start of the first window (t0), window length (dt) and stop time (ts)."""
    t0: AwareDatetime
    dt: timedelta
    ts: AwareDatetime

    @field_validator("t0", "ts")
    @classmethod
    def _to_utc(cls, value: datetime) -> datetime:
        return _utc(value)

    @field_validator("dt")
    @classmethod
    def _positive_duration(cls, value: timedelta) -> timedelta:
        if value <= timedelta(0):
            raise ValueError("window duration must be positive")
        return value

    @model_validator(mode="after")
    def _ordered(self) -> "WindowSpec":
        if self.ts < self.t0:
            raise ValueError("stop time ts must not precede t0")
        return self

    def windows(self) -> List[Window]:
        """Windows tiling [t0, ts); the last one is truncated at ts."""
        count = math.ceil((self.ts - self.t0) / self.dt)
        result = []
        for i in range(count):
            start = self.t0 + i * self.dt
            result.append(Window(i, start, min(start + self.dt, self.ts)))
        return result

    @classmethod
    def covering(cls, first: datetime, last: datetime, dt: timedelta,
                 t0: Optional[datetime] = None) -> "WindowSpec":
        """Smallest whole number of windows from t0 (default first) that includes last."""
        t0 = first if t0 is None else t0
        count = max(1, math.floor((last - t0) / dt) + 1)
        return cls(t0=t0, dt=dt, ts=t0 + count * dt)


def _parse_timestamp(value: str) -> datetime:
    stamp = pd.Timestamp(value.strip())
    if pd.isna(stamp):
        raise ValueError("missing timestamp")
    if stamp.tzinfo is None:
        raise ValueError(f"timestamp {value!r} lacks a UTC offset")
    return stamp.tz_convert("UTC").to_pydatetime()


def _parse_float(name: str, value: str) -> float:
    try:
        number = float(value)
    except ValueError:
        raise ValueError(f"{name} is not a number: {value!r}") from None
    if not math.isfinite(number):
        raise ValueError(f"{name} is not finite: {value!r}")
    return number


def _parse_row(row: Dict[str, str], kind: Optional[EventKind]) -> TelemetryRecord:
    raw_kind = row.get("kind", "").strip().lower()
    if raw_kind:
        try:
            row_kind = EventKind(raw_kind)
        except ValueError:
            raise ValueError(f"unknown kind {raw_kind!r}") from None
        if kind is not None and row_kind is not kind:
            raise ValueError(f"expected kind {kind.value}, got {row_kind.value}")
    elif kind is not None:
        row_kind = kind
    else:
        raise ValueError("missing kind")

    equipment_id = row["equipment_id"].strip()
    if not equipment_id:
        raise ValueError("missing equipment_id")

    raw_speed = row.get("speed_mps", "").strip()
    speed = None
    if raw_speed:
        speed = _parse_float("speed_mps", raw_speed)
        if speed < 0:
            raise ValueError(f"speed_mps is negative: {raw_speed!r}")

    return TelemetryRecord(
        timestamp=_parse_timestamp(row["timestamp"]),
        equipment_id=equipment_id,
        kind=row_kind,
        position=Point2(_parse_float("x", row["x"]), _parse_float("y", row["y"])),
        speed=speed,
    )


def _overlong_row(width: int):
    """on_bad_lines handler: swap a row with too many fields for a marked placeholder."""
    def handler(fields: List[str]) -> List[str]:
        return [f"{_OVERLONG}{len(fields)}"] + [""] * (width - 1)
    return handler


def load_csv(path: Union[str, Path], kind: Optional[EventKind] = None) -> EventStream:
    """Load a telemetry CSV.

    Args:
        path: CSV file with header ``timestamp,equipment_id,kind,x,y,speed_mps``.
        kind: When given, every row must be of this kind, and the ``kind``
            column may be omitted.

    Returns:
        EventStream: valid rows sorted by timestamp; malformed rows are
        reported in ``rejects`` with their line number.

    Raises:
        OSError: the file cannot be read.
        SchemaError: a required column is missing, the file is not UTF-8,
            or it cannot be tokenized (e.g. an unclosed quote).
    """
    path = Path(path)
    try:
        columns = [str(c).strip() for c in pd.read_csv(path, nrows=0, encoding="utf-8").columns]
        # header=None keeps the header row as the width reference, so an
        # over-long first data row is reported instead of becoming an index
        frame = pd.read_csv(path, header=None, names=columns, dtype=str, keep_default_na=False,
                            encoding="utf-8", skip_blank_lines=False, engine="python",
                            on_bad_lines=_overlong_row(len(columns)))
    except pd.errors.EmptyDataError:
        raise SchemaError(f"{path}: no header row") from None
    except UnicodeDecodeError as exc:
        raise SchemaError(f"{path}: not valid UTF-8 ({exc.reason} at byte {exc.start})") from None
    except pd.errors.ParserError as exc:
        raise SchemaError(f"{path}: {exc}") from None

    required = [c for c in COLUMNS if not (c == "kind" and kind is not None)]
    missing = [c for c in required if c not in columns]
    if missing:
        raise SchemaError(f"{path}: missing column(s) {', '.join(missing)}")

    records: List[TelemetryRecord] = []
    rejects: List[ParseError] = []
    # row 0 is the header itself
    for line, row in enumerate(frame.to_dict("records")[1:], start=2):
        # short rows come back as NaN for the missing fields
        cells = {k: "" if pd.isna(v) else str(v) for k, v in row.items()}
        first = cells[columns[0]]
        if first.startswith(_OVERLONG):
            saw = first[len(_OVERLONG):]
            rejects.append(ParseError(line, f"expected {len(columns)} fields, saw {saw}"))
            continue
        if not any(v.strip() for v in cells.values()):
            continue
        try:
            records.append(_parse_row(cells, kind))
        except ValueError as exc:
            rejects.append(ParseError(line, str(exc)))

    if rejects:
        logger.warning("%s: rejected %d of %d rows", path, len(rejects), len(records) + len(rejects))
    logger.info("%s: loaded %d records", path, len(records))
    return EventStream(tuple(records), tuple(rejects))


def write_csv(records: Iterable[TelemetryRecord], path: Union[str, Path]) -> Path:
    """Write records in the ingestion CSV format."""
    path = Path(path)
    rows = [
        {
            "timestamp": r.timestamp.isoformat(),
            "equipment_id": r.equipment_id,
            "kind": r.kind.value,
            "x": repr(r.position.x),
            "y": repr(r.position.y),
            "speed_mps": "" if r.speed is None else repr(r.speed),
        }
        for r in records
    ]
    pd.DataFrame(rows, columns=list(COLUMNS)).to_csv(path, index=False)
    return path


def write_rejects(rejects: Sequence[ParseError], path: Union[str, Path]) -> Path:
    path = Path(path)
    frame = pd.DataFrame([(r.line, r.reason) for r in rejects], columns=["line", "reason"])
    frame.to_csv(path, index=False)
    return path


def filter_stationary_dumps(stream: EventStream,
                            speed_threshold: float = DEFAULT_STATIONARY_SPEED) -> EventStream:
    """Keep truck GPS records where the truck is standing still.

    A record with a speed is kept when speed <= speed_threshold. A record
    without one is kept when the previous record of the same truck is at
    most 10 s older and at most 1 m away; it is emitted with speed 0.0 so
    that filtering the output again keeps it.
    """
    previous: Dict[str, TelemetryRecord] = {}
    kept = []
    for record in stream.records:
        if record.kind is not EventKind.TRUCK_GPS:
            continue
        before = previous.get(record.equipment_id)
        previous[record.equipment_id] = record
        if record.speed is not None:
            still = record.speed <= speed_threshold
        else:
            still = (
                before is not None
                and record.timestamp - before.timestamp <= STILLNESS_INTERVAL
                and record.position.distance_to(before.position) <= STILLNESS_RADIUS
            )
        if still:
            kept.append(record if record.speed is not None else replace(record, speed=0.0))
    logger.debug("stationary filter kept %d of %d records", len(kept), len(stream))
    return EventStream(tuple(kept), stream.rejects)


def slice_window(stream: EventStream, window: Window) -> List[TelemetryRecord]:
    """Records with window.start <= timestamp < window.end."""
    lo = bisect.bisect_left(stream._times, window.start)
    hi = bisect.bisect_left(stream._times, window.end)
    return list(stream.records[lo:hi])
