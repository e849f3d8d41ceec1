"""
Tests for GeoJSON, SVG and manifest output.
"""
import json
import re
from datetime import timedelta

import pytest
from conftest import T0

from stockpile_tracker.events import Window
from stockpile_tracker.geometry import Polygon
from stockpile_tracker.output import (RunManifest, emit_geojson, emit_svg, snapshot_filename,
                                      window_colors)
from stockpile_tracker.tracker import PolygonFeature, Role, Snapshot, Source


def window(index):
    start = T0 + index * timedelta(hours=2)
    return Window(index, start, start + timedelta(hours=2))


def square(x, y, size=1.0):
    return Polygon.from_vertices([(x, y), (x + size, y), (x + size, y + size), (x, y + size)])


def feature(polygon, index=0, role=Role.DUMP, source=Source.TRUCK, cluster_id=0, comparison=False):
    return PolygonFeature(polygon, role, source, index, cluster_id, polygon.area, comparison)


@pytest.fixture
def snapshots(unit_square):
    first = Snapshot(window(0), dump_features=(feature(unit_square),))
    second = Snapshot(
        window(1),
        dump_features=(feature(square(3, 0), 1), feature(square(6, 0, 2.0), 1, cluster_id=1)),
        reclaim_features=(feature(square(3, 0, 0.5), 1, Role.RECLAIM, Source.BUCKET),),
        comparison_features=(feature(square(3, 0, 0.5), 1, Role.RECLAIM, Source.DIGGER, comparison=True),),
    )
    return [first, second]


# geojson

def test_geojson_empty_snapshot():
    document = json.loads(emit_geojson(Snapshot(window(4))))
    assert document == {"type": "FeatureCollection", "local_crs": "local", "window_index": 4,
                        "features": []}


def test_geojson_unit_square(unit_square):
    text = emit_geojson(Snapshot(window(0), dump_features=(feature(unit_square),)), crs="EPSG:28350")
    document = json.loads(text)
    assert document["local_crs"] == "EPSG:28350"
    (item,) = document["features"]
    assert item["geometry"] == {"type": "Polygon",
                                "coordinates": [[[0, 0], [1, 0], [1, 1], [0, 1], [0, 0]]]}
    assert item["properties"] == {
        "window_index": 0,
        "t_start": "2019-06-01T00:00:00+00:00",
        "t_end": "2019-06-01T02:00:00+00:00",
        "role": "dump",
        "source": "truck",
        "cluster_id": 0,
        "model": "convex",
        "area_m2": 1.0,
        "comparison": False,
    }


def test_geojson_roles_and_sources(snapshots):
    document = json.loads(emit_geojson(snapshots[1], model="alpha(4)"))
    properties = [f["properties"] for f in document["features"]]
    assert [(p["role"], p["source"], p["comparison"]) for p in properties] == [
        ("dump", "truck", False), ("dump", "truck", False),
        ("reclaim", "bucket", False), ("reclaim", "digger", True),
    ]
    assert {p["model"] for p in properties} == {"alpha(4)"}
    assert {p["window_index"] for p in properties} == {1}


def test_geojson_coordinates_round_trip(rng):
    polygon = Polygon.from_vertices(rng.uniform(-1e5, 1e5, size=(3, 2)))
    document = json.loads(emit_geojson(Snapshot(window(0), dump_features=(feature(polygon),))))
    ring = document["features"][0]["geometry"]["coordinates"][0]
    assert ring[0] == ring[-1]
    for (x, y), vertex in zip(ring, polygon.vertices):
        assert abs(x - vertex.x) <= 1e-9
        assert abs(y - vertex.y) <= 1e-9


def test_geojson_is_deterministic(snapshots):
    assert emit_geojson(snapshots[1]) == emit_geojson(snapshots[1])
    assert emit_geojson(snapshots[1]).endswith("}\n")


def test_snapshot_filename():
    assert snapshot_filename(7) == "snapshot_00007.geojson"


# svg

def test_svg_one_path_per_feature(snapshots):
    svg = emit_svg(snapshots)
    assert svg.count("<path ") == 5
    assert svg.count('class="dump"') == 3
    assert svg.count('class="reclaim"') == 1
    assert svg.count('class="comparison"') == 1
    assert ".reclaim {" in svg and "stroke-dasharray" in svg


def test_svg_legend_in_window_order(snapshots):
    svg = emit_svg(list(reversed(snapshots)))
    assert re.findall(r'class="legend-swatch" data-window="(\d+)"', svg) == ["0", "1"]


def test_svg_colours_run_oldest_to_latest(snapshots):
    colors = window_colors([2, 0, 1])
    assert list(colors) == [0, 1, 2]
    assert len(set(colors.values())) == 3
    svg = emit_svg(snapshots)
    assert f'data-window="0" data-cluster="0" fill="{window_colors([0, 1])[0]}"' in svg


def test_svg_view_box_has_margin(unit_square):
    svg = emit_svg([Snapshot(window(0), dump_features=(feature(unit_square),))])
    (view_box,) = re.findall(r'class="map"[^>]*viewBox="([^"]+)"', svg)
    assert [float(v) for v in view_box.split()] == pytest.approx([-0.05, -1.05, 1.1, 1.1])


def test_svg_path_flips_northing(unit_square):
    svg = emit_svg([Snapshot(window(0), dump_features=(feature(unit_square),))])
    assert 'd="M 0.0 0.0 L 1.0 0.0 L 1.0 -1.0 L 0.0 -1.0 Z"' in svg


def test_svg_requires_snapshots():
    with pytest.raises(ValueError):
        emit_svg([])


# manifest

def test_manifest_text(snapshots):
    manifest = RunManifest(config={"model": "convex", "algorithm": "2"},
                           input_digests={"dumps": "abc"}, reject_counts={"dumps": 1})
    for snapshot in snapshots:
        manifest.record_snapshot(snapshot)
    manifest.outputs.append("snapshot_00000.geojson")
    assert manifest.to_text().splitlines() == [
        "config.algorithm: 2",
        "config.model: convex",
        "input.dumps.sha256: abc",
        "input.dumps.rejects: 1",
        "windows: 2",
        "window.00000.features: dump=1 reclaim=0",
        "window.00001.features: dump=2 reclaim=1",
        "output: snapshot_00000.geojson",
    ]
    manifest.duration_s = 0.25
    assert manifest.to_text().endswith("duration_s: 0.250\n")


def test_svg_fifteen_window_legend():
    """Each window gets its own legend entry and colour."""
    snapshots = [Snapshot(window(i), dump_features=(feature(square(3 * i, 0), i),)) for i in range(15)]
    svg = emit_svg(snapshots)
    assert svg.count("<path ") == 15
    swatches = re.findall(r'class="legend-swatch" data-window="(\d+)" x="0" y="\d+" '
                          r'width="14" height="14" fill="(#[0-9a-f]{6})"', svg)
    assert [int(index) for index, _ in swatches] == list(range(15))
    assert len({color for _, color in swatches}) == 15
