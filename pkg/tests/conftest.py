"""
Shared fixtures for the stockpile_tracker test suite.
"""
from datetime import datetime, timedelta, timezone

import numpy as np
import pytest

from stockpile_tracker.events import EventKind, TelemetryRecord
from stockpile_tracker.geometry import Point2, Polygon

T0 = datetime(2019, 6, 1, tzinfo=timezone.utc)


@pytest.fixture
def rng():
    return np.random.default_rng(20190601)


@pytest.fixture
def t0():
    return T0


@pytest.fixture
def unit_square():
    return Polygon.from_vertices([(0, 0), (1, 0), (1, 1), (0, 1)])


def record(seconds, x, y, kind=EventKind.TRUCK_GPS, equipment_id="truck-01", speed=None, start=T0):
    """Build a TelemetryRecord `seconds` after start."""
    return TelemetryRecord(
        timestamp=start + timedelta(seconds=seconds),
        equipment_id=equipment_id,
        kind=kind,
        position=Point2(x, y),
        speed=speed,
    )
