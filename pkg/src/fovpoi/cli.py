"""``fovtool``: generate datasets, detect top-k POIs, run benchmarks.

Exit codes: 0 success, 1 I/O failure, 2 usage or validation error,
3 grid over the memory cap.
"""
from __future__ import annotations

import argparse
import dataclasses
import json
import math
import sys
from pathlib import Path

from . import datagen
from .bench import STOP_ALIASES, BenchmarkError, parse_suite, run_benchmark
from .detectors import (CisParams, Query, StopCriterion, detect_cis, detect_naive,
                        detect_optimized, detect_single_sampling)
from .geometry import Mbr
from .grid import DEFAULT_MAX_CELLS, CapacityError, write_heatmap_csv, write_heatmap_pgm
from .model import ModelParams
from .store import DatasetError, TimeInterval, load

EXIT_IO, EXIT_USAGE, EXIT_CAPACITY = 1, 2, 3


class UsageError(Exception):
    def __init__(self, flag: str, message: str):
        super().__init__(f"{flag}: {message}")


def _fail(code: int, message: str) -> int:
    print(f"fovtool: error: {message}", file=sys.stderr)
    return code


def _parse_area(text: str) -> Mbr:
    try:
        lat0, lon0, lat1, lon1 = (float(x) for x in text.split(","))
        if not all(math.isfinite(v) for v in (lat0, lon0, lat1, lon1)):
            raise ValueError("non-finite value")
        if not (-90 <= lat0 <= 90 and -90 <= lat1 <= 90
                and -180 <= lon0 <= 180 and -180 <= lon1 <= 180):
            raise ValueError("coordinates out of range")
        return Mbr(lat0, lat1, lon0, lon1)
    except ValueError as exc:
        raise UsageError("--area", f"expected latmin,lonmin,latmax,lonmax ({exc})") from None


def _parse_time(text: str | None) -> TimeInterval:
    if text is None:
        return TimeInterval.everything()
    try:
        t0, t1 = (int(x) for x in text.split(","))
        return TimeInterval(t0, t1)
    except ValueError as exc:
        raise UsageError("--time", f"expected tmin,tmax epoch seconds ({exc})") from None


def _query(args) -> Query:
    area = _parse_area(args.area)
    t = _parse_time(args.time)
    if args.k < 1:
        raise UsageError("--k", "must be >= 1")
    if not args.cell > 0:
        raise UsageError("--cell", "must be > 0")
    try:
        model = ModelParams(args.sigma_a, args.sigma_d)
    except ValueError as exc:
        raise UsageError("--sigma-a/--sigma-d", str(exc)) from None
    return Query(area, t, args.k, args.cell, model, args.max_cells)


def _cis_params(args) -> CisParams:
    try:
        stop = StopCriterion(STOP_ALIASES[args.stop], args.threshold)
    except ValueError as exc:
        raise UsageError("--threshold", str(exc)) from None
    for flag, val in (("--fc", args.fc), ("--fi", args.fi)):
        if not 0 < val <= 1:
            raise UsageError(flag, "must be in (0, 1]")
    if args.clusters < 1:
        raise UsageError("--clusters", "must be >= 1")
    if not args.expand > 0:
        raise UsageError("--expand", "must be > 0")
    if args.threads < 1:
        raise UsageError("--threads", "must be >= 1")
    return CisParams(args.clusters, args.fc, args.fi, stop, args.seed, args.expand, args.threads)


def _add_query_flags(p: argparse.ArgumentParser) -> None:
    p.add_argument("--data", required=True, help="dataset CSV")
    p.add_argument("--area", required=True, help="latmin,lonmin,latmax,lonmax")
    p.add_argument("--time", help="tmin,tmax (inclusive, epoch seconds)")
    p.add_argument("--k", type=int, default=5)
    p.add_argument("--cell", type=float, default=0.0001, help="cell side in degrees")
    p.add_argument("--sigma-a", type=float, default=15.0, help="angular sigma, degrees")
    p.add_argument("--sigma-d", type=float, default=25.0, help="distance sigma, meters")
    p.add_argument("--max-cells", type=int, default=DEFAULT_MAX_CELLS)
    p.add_argument("--seed", type=int, default=0)


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="fovtool", description="Generate FoV datasets, detect top-k POI cells, run benchmarks.")
    sub = parser.add_subparsers(dest="command", required=True)

    g = sub.add_parser("gen", help="generate a synthetic dataset")
    g.add_argument("--profile", required=True, help="key=value profile file")
    g.add_argument("--out", required=True, help="output CSV")
    g.add_argument("--variant", choices=sorted(datagen.STANDARD_MIXES))
    g.add_argument("--seed", type=int)

    d = sub.add_parser("detect", help="detect top-k cells")
    _add_query_flags(d)
    d.add_argument("--algo", choices=("naive", "optimized", "sample", "cis"), default="optimized")
    d.add_argument("--fraction", type=float, default=0.5, help="sample size for --algo sample")
    d.add_argument("--clusters", type=int, default=6)
    d.add_argument("--fc", type=float, default=0.5)
    d.add_argument("--fi", type=float, default=0.05)
    d.add_argument("--stop", choices=sorted(STOP_ALIASES), default="maxci")
    d.add_argument("--threshold", type=float)
    d.add_argument("--expand", type=float, default=1.0, help="cluster box radius multiplier")
    d.add_argument("--threads", type=int, default=1)
    d.add_argument("--no-shortcut", action="store_true",
                   help="evaluate the angular term for circular FoVs too")
    d.add_argument("--heatmap", help="normalized heatmap output (.pgm or .csv)")
    d.add_argument("--report", help="JSON report output")

    b = sub.add_parser("bench", help="benchmark a detector suite")
    _add_query_flags(b)
    b.add_argument("--suite", required=True,
                   help="suite file: 'name algo [key=value ...]' per line, first is reference")
    b.add_argument("--repeats", type=int, default=1)
    b.add_argument("--out", required=True, help="results CSV")
    return parser


def _load(path: str):
    try:
        return load(path)
    except DatasetError as exc:
        raise UsageError("--data", str(exc)) from None


def cmd_gen(args) -> int:
    try:
        profile = datagen.load_profile(args.profile)
    except OSError as exc:
        return _fail(EXIT_IO, f"--profile: {exc}")
    except ValueError as exc:
        return _fail(EXIT_USAGE, f"--profile: {exc}")
    try:
        if args.variant:
            profile = datagen.profile_from_table1(args.variant, profile)
        if args.seed is not None:
            profile = dataclasses.replace(profile, seed=args.seed)
    except ValueError as exc:
        return _fail(EXIT_USAGE, str(exc))
    videos = datagen.generate_videos(profile)
    try:
        n = datagen.write_videos(videos, args.out)
    except OSError as exc:
        return _fail(EXIT_IO, f"--out: {exc}")
    print(f"wrote {n} rows to {args.out}")
    return 0


def _print_table(cells) -> None:
    print("rank,x,y,lat,lon,score")
    for i, c in enumerate(cells, 1):
        print(f"{i},{c.x},{c.y},{c.center.lat:.7f},{c.center.lon:.7f},{c.score:.10g}")


def cmd_detect(args) -> int:
    query = _query(args)
    if args.algo == "sample" and not 0 < args.fraction <= 1:
        raise UsageError("--fraction", "must be in (0, 1]")
    params = _cis_params(args) if args.algo == "cis" else None
    if args.heatmap and Path(args.heatmap).suffix.lower() not in (".pgm", ".csv"):
        raise UsageError("--heatmap", "extension must be .pgm or .csv")
    query.grid()  # capacity check before touching the data
    store = _load(args.data)
    if args.algo == "naive":
        res = detect_naive(store, query)
    elif args.algo == "optimized":
        res = detect_optimized(store, query, circular_shortcut=not args.no_shortcut)
    elif args.algo == "sample":
        res = detect_single_sampling(store, query, args.fraction, args.seed)
    else:
        res = detect_cis(store, query, params, heatmap=bool(args.heatmap))
    _print_table(res.cells)
    if args.heatmap:
        writer = write_heatmap_pgm if args.heatmap.lower().endswith(".pgm") else write_heatmap_csv
        writer(res.matrix, args.heatmap)
    if args.report:
        payload = {"cells": [{"rank": i, "x": c.x, "y": c.y, "lat": c.center.lat,
                              "lon": c.center.lon, "score": c.score}
                             for i, c in enumerate(res.cells, 1)],
                   "report": res.report.to_dict()}
        Path(args.report).write_text(json.dumps(payload, indent=2), encoding="utf-8")
    return 0


def cmd_bench(args) -> int:
    query = _query(args)
    if args.repeats < 1:
        raise UsageError("--repeats", "must be >= 1")
    try:
        suite = parse_suite(Path(args.suite).read_text(encoding="utf-8"))
    except ValueError as exc:
        raise UsageError("--suite", str(exc)) from None
    query.grid()
    store = _load(args.data)
    try:
        table = run_benchmark(store, query, suite, args.repeats, args.seed)
    except BenchmarkError as exc:
        if isinstance(exc.__cause__, CapacityError):
            raise exc.__cause__ from None
        return _fail(EXIT_USAGE, str(exc))
    table.write_csv(args.out)
    print(table.format_summary())
    return 0


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    handler = {"gen": cmd_gen, "detect": cmd_detect, "bench": cmd_bench}[args.command]
    try:
        return handler(args)
    except UsageError as exc:
        return _fail(EXIT_USAGE, str(exc))
    except CapacityError as exc:
        return _fail(EXIT_CAPACITY, f"grid too large: {exc.required} cells required, "
                                    f"{exc.allowed} allowed")
    except OSError as exc:
        return _fail(EXIT_IO, str(exc))


if __name__ == "__main__":
    sys.exit(main())
