"""
Output module for stockpile_tracker - GeoJSON snapshots, SVG overview and run manifest
"""

import json
from dataclasses import dataclass, field
from typing import Dict, List, Optional, Sequence, Tuple
from xml.sax.saxutils import escape

from matplotlib import colormaps
from matplotlib.colors import to_hex

from .geometry import Polygon
from .tracker import PolygonFeature, Role, Snapshot

COORD_DECIMALS = 9
SVG_WIDTH = 800
SVG_HEIGHT = 600
LEGEND_WIDTH = 160
LEGEND_ROW = 18
MARGIN_FRACTION = 0.05
DEFAULT_COLORMAP = "viridis"


def _num(value: float) -> float:
    """Round to COORD_DECIMALS; json then prints the shortest repr."""
    rounded = round(float(value), COORD_DECIMALS)
    return 0.0 if rounded == 0 else rounded


def _ring_coordinates(polygon: Polygon) -> List[List[float]]:
    coords = [[_num(p.x), _num(p.y)] for p in polygon.vertices]
    return coords + [coords[0]]


def _feature(feature: PolygonFeature, snapshot: Snapshot, model: str) -> Dict:
    return {
        "type": "Feature",
        "geometry": {"type": "Polygon", "coordinates": [_ring_coordinates(feature.polygon)]},
        "properties": {
            "window_index": feature.window_index,
            "t_start": snapshot.window.start.isoformat(),
            "t_end": snapshot.window.end.isoformat(),
            "role": feature.role.value,
            "source": feature.source.value,
            "cluster_id": feature.cluster_id,
            "model": model,
            "area_m2": _num(feature.area_m2),
            "comparison": feature.comparison,
        },
    }


def emit_geojson(snapshot: Snapshot, model: str = "convex", crs: str = "local") -> str:
    """Serialize a snapshot as a GeoJSON FeatureCollection.

    Coordinates stay in the input metric grid; the ``local_crs`` foreign
    member names it. Output is byte-stable for identical snapshots.
    """
    document = {
        "type": "FeatureCollection",
        "local_crs": crs,
        "window_index": snapshot.window.index,
        "features": [_feature(f, snapshot, model) for f in snapshot.features],
    }
    return json.dumps(document, indent=2) + "\n"


def snapshot_filename(index: int) -> str:
    return f"snapshot_{index:05}.geojson"


def window_colors(indices: Sequence[int], colormap: str = DEFAULT_COLORMAP) -> Dict[int, str]:
    """Oldest-to-latest ramp over the given window indices."""
    ordered = sorted(set(indices))
    cmap = colormaps[colormap]
    if len(ordered) == 1:
        return {ordered[0]: to_hex(cmap(0.5))}
    return {index: to_hex(cmap(i / (len(ordered) - 1))) for i, index in enumerate(ordered)}


def _bounds(snapshots: Sequence[Snapshot]) -> Tuple[float, float, float, float]:
    boxes = [f.polygon.bounds for s in snapshots for f in s.features]
    if not boxes:
        return (0.0, 0.0, 1.0, 1.0)
    return (min(b[0] for b in boxes), min(b[1] for b in boxes),
            max(b[2] for b in boxes), max(b[3] for b in boxes))


def _fmt(value: float) -> str:
    return repr(_num(value))


def _path(polygon: Polygon) -> str:
    # SVG y grows downwards; northing is negated.
    steps = [f"{_fmt(p.x)} {_fmt(-p.y)}" for p in polygon.vertices]
    return "M " + " L ".join(steps) + " Z"


_STYLE = """
.dump { stroke: #222222; stroke-width: 1.5; fill-opacity: 0.55; }
.reclaim { stroke: #b2182b; stroke-width: 2; stroke-dasharray: 6 3; fill-opacity: 0.25; }
.comparison { stroke: #2166ac; stroke-width: 1.5; stroke-dasharray: 2 2; fill: none; }
.legend text { font-family: sans-serif; font-size: 12px; }
"""


def emit_svg(snapshots: Sequence[Snapshot], colormap: str = DEFAULT_COLORMAP,
             title: str = "stockpile polygons") -> str:
    """Draw every polygon of every snapshot in one SVG.

    Fill colour encodes the window (oldest to latest), stroke style the role.
    The map viewport fits the data bounds plus a 5% margin; the legend sits to
    its right.
    """
    if not snapshots:
        raise ValueError("emit_svg needs at least one snapshot")
    colors = window_colors([s.window.index for s in snapshots], colormap)

    minx, miny, maxx, maxy = _bounds(snapshots)
    width = (maxx - minx) or 1.0
    height = (maxy - miny) or 1.0
    mx, my = width * MARGIN_FRACTION, height * MARGIN_FRACTION
    view_box = f"{_fmt(minx - mx)} {_fmt(-maxy - my)} {_fmt(width + 2 * mx)} {_fmt(height + 2 * my)}"

    lines = [
        f'<svg xmlns="http://www.w3.org/2000/svg" width="{SVG_WIDTH + LEGEND_WIDTH}" '
        f'height="{SVG_HEIGHT}">',
        f"<title>{escape(title)}</title>",
        f"<style>{_STYLE}</style>",
        f'<svg class="map" x="0" y="0" width="{SVG_WIDTH}" height="{SVG_HEIGHT}" '
        f'viewBox="{view_box}" preserveAspectRatio="xMidYMid meet">',
    ]
    for snapshot in snapshots:
        color = colors[snapshot.window.index]
        for feature in snapshot.features:
            css = "comparison" if feature.comparison else feature.role.value
            fill = "none" if feature.comparison else color
            lines.append(
                f'<path class="{css}" data-window="{feature.window_index}" '
                f'data-cluster="{feature.cluster_id}" fill="{fill}" '
                f'vector-effect="non-scaling-stroke" d="{_path(feature.polygon)}"/>'
            )
    lines.append("</svg>")

    lines.append(f'<g class="legend" transform="translate({SVG_WIDTH + 10},10)">')
    for row, (index, color) in enumerate(sorted(colors.items())):
        y = row * LEGEND_ROW
        lines.append(f'<rect class="legend-swatch" data-window="{index}" x="0" y="{y}" '
                     f'width="14" height="14" fill="{color}"/>')
        lines.append(f'<text x="20" y="{y + 12}">window {index}</text>')
    lines.append("</g>")
    lines.append("</svg>")
    return "\n".join(lines) + "\n"


@dataclass
class RunManifest:
    """Summary of one CLI run, written as ``key: value`` lines.

    Everything except duration_s is reproducible from inputs and flags.
    """
    config: Dict[str, str] = field(default_factory=dict)
    input_digests: Dict[str, str] = field(default_factory=dict)
    reject_counts: Dict[str, int] = field(default_factory=dict)
    window_counts: List[Tuple[int, int, int]] = field(default_factory=list)
    outputs: List[str] = field(default_factory=list)
    duration_s: Optional[float] = None

    def record_snapshot(self, snapshot: Snapshot) -> None:
        self.window_counts.append((snapshot.window.index,
                                   sum(f.role is Role.DUMP for f in snapshot.features),
                                   sum(f.role is Role.RECLAIM and not f.comparison
                                       for f in snapshot.features)))

    def to_text(self) -> str:
        lines = [f"config.{key}: {value}" for key, value in sorted(self.config.items())]
        lines += [f"input.{name}.sha256: {digest}" for name, digest in sorted(self.input_digests.items())]
        lines += [f"input.{name}.rejects: {count}" for name, count in sorted(self.reject_counts.items())]
        lines.append(f"windows: {len(self.window_counts)}")
        lines += [f"window.{index:05}.features: dump={dumps} reclaim={reclaims}"
                  for index, dumps, reclaims in self.window_counts]
        lines += [f"output: {name}" for name in self.outputs]
        if self.duration_s is not None:
            lines.append(f"duration_s: {self.duration_s:.3f}")
        return "\n".join(lines) + "\n"
