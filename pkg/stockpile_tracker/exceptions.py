"""
Exception hierarchy for stockpile_tracker.

Every error raised on purpose by the package derives from StockpileError, so
callers can catch one type at the CLI boundary.
"""


class StockpileError(Exception):
    """Base class for all stockpile_tracker errors."""


class GeometryError(StockpileError):
    """A geometry kernel input violates its preconditions."""


class DegenerateInput(GeometryError):
    """Fewer than three distinct points, or all points collinear."""


class NotConvex(GeometryError):
    """A convex-only operation received a non-convex polygon."""


class ConfigError(StockpileError):
    """Invalid tracker configuration or command-line flags."""


class SchemaError(StockpileError):
    """A telemetry CSV is missing required columns."""


class DegenerateReclaim(StockpileError):
    """Reclaim positions for a window cannot form a polygon."""

    def __init__(self, window_index: int, reason: str):
        super().__init__(f"window {window_index}: reclaim skipped ({reason})")
        self.window_index = window_index
        self.reason = reason
