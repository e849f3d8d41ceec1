"""
Command-line interface for stockpile_tracker

    stockpile-tracker --algorithm 2 --dumps dumps.csv --buckets buckets.csv --out out/
    stockpile-tracker simulate --scenario growth --out data/

Exit codes: 0 success, 1 configuration error, 2 input/output error.
"""

import argparse
import hashlib
import logging
import math
import sys
import time
from datetime import datetime, timedelta
from pathlib import Path
from typing import Dict, List, Optional, Sequence, Tuple

import pandas as pd
from tqdm import tqdm

from . import __version__
from .clustering import DbscanParams
from .events import (DEFAULT_STATIONARY_SPEED, EventKind, EventStream, WindowSpec,
                     filter_stationary_dumps, load_csv, write_csv, write_rejects)
from .exceptions import ConfigError, SchemaError, StockpileError
from .output import RunManifest, emit_geojson, emit_svg, snapshot_filename
from .scenarios import SCENARIOS
from .tracker import (DEFAULT_DUMP_WINDOW, DEFAULT_EPS_M, DEFAULT_LEDGER_WINDOW, DEFAULT_MIN_PTS,
                      DEFAULT_RECLAIM_WINDOW, Mode, PolygonKind,
                      PolygonModel, TrackerConfig, TrackerStreams, run_algorithm1, run_algorithm2)

logger = logging.getLogger(__name__)

EXIT_OK = 0
EXIT_CONFIG = 1
EXIT_IO = 2


class _ArgumentParser(argparse.ArgumentParser):
    """argparse exits with status 2 on bad flags; flag errors here are config errors."""

    def error(self, message):
        raise ConfigError(message)


def _timestamp(value: str) -> datetime:
    stamp = pd.Timestamp(value)
    if pd.isna(stamp) or stamp.tzinfo is None:
        raise argparse.ArgumentTypeError(f"expected ISO 8601 with UTC offset, got {value!r}")
    return stamp.tz_convert("UTC").to_pydatetime()


def _offset(value: str) -> Tuple[float, float]:
    try:
        dx, dy = (float(part) for part in value.split(","))
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected DX,DY, got {value!r}") from None
    return dx, dy


def build_parser() -> argparse.ArgumentParser:
    parser = _ArgumentParser(
        prog="stockpile-tracker",
        description="Reconstruct stockpile dump and reclaim polygons from GPS telemetry",
    )
    parser.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    parser.add_argument("--algorithm", type=int, choices=(1, 2), default=2,
                        help="1: windowed dump-only or reclaim-only polygons; 2: dump ledger (default)")
    parser.add_argument("--mode", choices=[m.value for m in Mode],
                        help="input selection for algorithm 1")
    parser.add_argument("--dumps", type=Path, help="truck GPS CSV")
    parser.add_argument("--buckets", type=Path, help="bucket reclaim CSV")
    parser.add_argument("--diggers", type=Path, help="digger GPS CSV")
    parser.add_argument("--model", choices=[k.value for k in PolygonKind], default="convex",
                        help="polygon model (default: convex)")
    parser.add_argument("--alpha", type=float, help="alpha shape maximum edge length in metres")
    parser.add_argument("--eps", type=float, default=DEFAULT_EPS_M,
                        help=f"DBSCAN search distance in metres (default: {DEFAULT_EPS_M:g})")
    parser.add_argument("--min-pts", type=int, default=DEFAULT_MIN_PTS,
                        help=f"DBSCAN minimum points (default: {DEFAULT_MIN_PTS})")
    parser.add_argument("--window-hours", type=float,
                        help="window length in hours (default: 2 for dumps, 0.5 for reclaims, 24 for algorithm 2)")
    parser.add_argument("--start", type=_timestamp, help="first window start (ISO 8601)")
    parser.add_argument("--end", type=_timestamp, help="stop time (ISO 8601)")
    parser.add_argument("--digger-offset", type=_offset, default=(0.0, 0.0),
                        help="DX,DY metres added to digger positions")
    parser.add_argument("--stationary-speed", type=float, default=DEFAULT_STATIONARY_SPEED,
                        help="maximum truck speed in m/s for a dump sample")
    parser.add_argument("--no-digger-fallback", action="store_true",
                        help="never use digger positions to remove dumps")
    parser.add_argument("--compare-digger", action="store_true",
                        help="also draw digger reclaim polygons when bucket data exists")
    parser.add_argument("--out", type=Path, default=Path("out"), help="output directory")
    parser.add_argument("--format", choices=("geojson", "svg", "both"), default="geojson")
    parser.add_argument("--crs", default="local", help="label of the input metric CRS")
    parser.add_argument("--progress", action="store_true", help="show a progress bar")
    parser.add_argument("--verbose", "-v", action="store_true", help="debug logging")
    return parser


def _polygon_model(args) -> PolygonModel:
    if args.model == PolygonKind.ALPHA.value:
        if args.alpha is None:
            raise ConfigError("--model alpha requires --alpha METERS (alpha > 0)")
        if math.isnan(args.alpha) or args.alpha <= 0:
            raise ConfigError(f"--alpha must be > 0, got {args.alpha:g}")
        return PolygonModel(kind=PolygonKind.ALPHA, alpha=args.alpha)
    return PolygonModel()


def _inputs(args) -> Dict[str, Tuple[Path, EventKind]]:
    """Named input files the run needs, with the event kind each must hold."""
    wanted = {"dumps": (args.dumps, EventKind.TRUCK_GPS),
              "buckets": (args.buckets, EventKind.BUCKET_RECLAIM),
              "diggers": (args.diggers, EventKind.DIGGER_GPS)}
    if args.algorithm == 1:
        if args.mode is None:
            raise ConfigError("--algorithm 1 requires --mode dump|reclaim")
        name = "dumps" if args.mode == Mode.DUMP_ONLY.value else "buckets"
        if wanted[name][0] is None:
            raise ConfigError(f"--mode {args.mode} requires --{name}")
        return {name: wanted[name]}
    if args.mode is not None:
        raise ConfigError("--mode applies to --algorithm 1 only")
    if args.dumps is None:
        raise ConfigError("--algorithm 2 requires --dumps")
    return {name: spec for name, spec in wanted.items() if spec[0] is not None}


def _window_length(args) -> timedelta:
    if args.window_hours is not None:
        if not math.isfinite(args.window_hours) or args.window_hours <= 0:
            raise ConfigError(f"--window-hours must be > 0, got {args.window_hours:g}")
        return timedelta(hours=args.window_hours)
    if args.algorithm == 2:
        return DEFAULT_LEDGER_WINDOW
    return DEFAULT_DUMP_WINDOW if args.mode == Mode.DUMP_ONLY.value else DEFAULT_RECLAIM_WINDOW


def _window_spec(args, dt: timedelta, streams: Sequence[EventStream]) -> WindowSpec:
    spans = [s.span() for s in streams if s.span() is not None]
    if args.start is not None and args.end is not None:
        return WindowSpec(t0=args.start, dt=dt, ts=args.end)
    if not spans:
        if args.start is None and args.end is None:
            raise ConfigError("inputs hold no events; give --start and --end")
        anchor = args.start or args.end
        return WindowSpec(t0=anchor, dt=dt, ts=anchor)
    first = min(span[0] for span in spans)
    last = max(span[1] for span in spans)
    if args.end is not None:
        return WindowSpec(t0=args.start or first, dt=dt, ts=args.end)
    return WindowSpec.covering(first, last, dt, t0=args.start)


def _digest(path: Path) -> str:
    return hashlib.sha256(path.read_bytes()).hexdigest()


def _config_echo(args, cfg: TrackerConfig) -> Dict[str, str]:
    echo = {
        "algorithm": str(args.algorithm),
        "model": cfg.model.label,
        "dump_eps": repr(cfg.dump_dbscan.eps),
        "dump_min_pts": str(cfg.dump_dbscan.min_pts),
        "reclaim_eps": repr(cfg.reclaim_dbscan.eps),
        "reclaim_min_pts": str(cfg.reclaim_dbscan.min_pts),
        "window_start": cfg.window.t0.isoformat(),
        "window_length_s": repr(cfg.window.dt.total_seconds()),
        "window_stop": cfg.window.ts.isoformat(),
        "digger_offset": f"{cfg.digger_offset[0]!r},{cfg.digger_offset[1]!r}",
        "digger_fallback": str(cfg.digger_fallback).lower(),
        "stationary_speed": repr(cfg.stationary_speed),
        "crs": args.crs,
        "format": args.format,
    }
    if args.mode is not None:
        echo["mode"] = args.mode
    return echo


def _configure_logging(verbose: bool) -> None:
    logging.basicConfig(level=logging.DEBUG if verbose else logging.WARNING,
                        format="%(levelname)s %(name)s: %(message)s", stream=sys.stderr)


def _run_track(args) -> int:
    started = time.monotonic()
    model = _polygon_model(args)
    params = DbscanParams(eps=args.eps, min_pts=args.min_pts)
    dt = _window_length(args)
    inputs = _inputs(args)

    missing = [str(path) for path, _ in inputs.values() if not path.is_file()]
    if missing:
        raise FileNotFoundError(f"input file not found: {', '.join(missing)}")

    streams = {name: load_csv(path, kind) for name, (path, kind) in inputs.items()}
    settings = dict(
        model=model,
        dump_dbscan=params,
        reclaim_dbscan=params,
        digger_offset=args.digger_offset,
        stationary_speed=args.stationary_speed,
        digger_fallback=not args.no_digger_fallback,
        compare_digger=args.compare_digger,
    )
    cfg = TrackerConfig(window=_window_spec(args, dt, list(streams.values())), **settings)
    if "dumps" in streams:
        streams["dumps"] = filter_stationary_dumps(streams["dumps"], cfg.stationary_speed)
        # the derived window range follows the filtered dumps
        cfg = TrackerConfig(window=_window_spec(args, dt, list(streams.values())), **settings)

    if args.algorithm == 1:
        stream = next(iter(streams.values()))
        snapshots = run_algorithm1(stream, cfg, Mode(args.mode), progress=args.progress)
    else:
        tracker_streams = TrackerStreams(**streams)
        snapshots = run_algorithm2(tracker_streams, cfg, progress=args.progress)

    out: Path = args.out
    out.mkdir(parents=True, exist_ok=True)
    manifest = RunManifest(config=_config_echo(args, cfg))
    for name, (path, _) in inputs.items():
        manifest.input_digests[name] = _digest(path)
        manifest.reject_counts[name] = len(streams[name].rejects)
        if streams[name].rejects:
            report = write_rejects(streams[name].rejects, out / f"rejects_{name}.csv")
            manifest.outputs.append(report.name)

    for snapshot in tqdm(snapshots, desc="writing", unit="snapshot", disable=not args.progress):
        manifest.record_snapshot(snapshot)
        if args.format in ("geojson", "both"):
            target = out / snapshot_filename(snapshot.window.index)
            target.write_text(emit_geojson(snapshot, cfg.model.label, args.crs), encoding="utf-8")
            manifest.outputs.append(target.name)
    if args.format in ("svg", "both") and snapshots:
        target = out / "snapshots.svg"
        target.write_text(emit_svg(snapshots), encoding="utf-8")
        manifest.outputs.append(target.name)

    manifest.duration_s = time.monotonic() - started
    (out / "manifest.txt").write_text(manifest.to_text(), encoding="utf-8")
    logger.info("wrote %d windows to %s", len(snapshots), out)
    return EXIT_OK


def cmd_track(argv: Optional[List[str]] = None) -> int:
    """Run the tracker with command-line flags; returns the exit code."""
    try:
        args = build_parser().parse_args(argv)
        return _run_track(args)
    except ConfigError as exc:
        print(f"stockpile-tracker: configuration error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except (OSError, SchemaError) as exc:
        print(f"stockpile-tracker: input/output error: {exc}", file=sys.stderr)
        return EXIT_IO
    except StockpileError as exc:
        print(f"stockpile-tracker: {exc}", file=sys.stderr)
        return EXIT_CONFIG


def cmd_simulate(argv: Optional[List[str]] = None) -> int:
    """Write a synthetic scenario as dumps/buckets/diggers CSVs."""
    parser = _ArgumentParser(prog="stockpile-tracker simulate",
                             description="Write synthetic stockpile telemetry")
    parser.add_argument("--scenario", choices=sorted(SCENARIOS), required=True)
    parser.add_argument("--seed", type=int, default=0)
    parser.add_argument("--out", type=Path, required=True)
    try:
        args = parser.parse_args(argv)
        scenario = SCENARIOS[args.scenario](seed=args.seed)
        args.out.mkdir(parents=True, exist_ok=True)
        for name, stream in (("dumps", scenario.dumps), ("buckets", scenario.buckets),
                             ("diggers", scenario.diggers)):
            write_csv(stream.records, args.out / f"{name}.csv")
    except ConfigError as exc:
        print(f"stockpile-tracker simulate: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except OSError as exc:
        print(f"stockpile-tracker simulate: {exc}", file=sys.stderr)
        return EXIT_IO
    print(f"{scenario.name}: start {scenario.start.isoformat()}, "
          f"{scenario.n_windows} windows of {scenario.window}")
    return EXIT_OK


def main(argv: Optional[List[str]] = None) -> None:
    """Main entry point"""
    argv = list(sys.argv[1:] if argv is None else argv)
    _configure_logging("--verbose" in argv or "-v" in argv)
    if argv and argv[0] == "simulate":
        sys.exit(cmd_simulate(argv[1:]))
    sys.exit(cmd_track(argv))
