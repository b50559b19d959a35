"""FoV dataset ingestion and an in-memory R-tree over FoV rectangles."""
from __future__ import annotations

import csv
import math
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from .geometry import FoV, GeoPoint, Mbr, mbr_intersects_array
from .grid import FovArrays

CSV_FIELDS = ("video_id", "t", "lat", "lon", "theta", "r", "alpha")


class DatasetError(ValueError):
    """A dataset row could not be parsed or failed validation."""

    def __init__(self, line: int, field: str, message: str):
        super().__init__(f"line {line}, field {field!r}: {message}")
        self.line = line
        self.field = field


@dataclass(frozen=True)
class TimeInterval:
    t_min: int
    t_max: int

    def __post_init__(self):
        if self.t_min > self.t_max:
            raise ValueError(f"empty time interval [{self.t_min}, {self.t_max}]")

    @classmethod
    def everything(cls) -> TimeInterval:
        return cls(-(2**62), 2**62)


class RTree:
    """Static R-tree bulk loaded with Sort-Tile-Recursive packing.

    Each level is stored as arrays: node boxes and the contiguous range of
    children (entries of the level below, or packed leaf entries) each node
    covers. Queries descend level by level with vectorized box tests.
    """

    def __init__(self, boxes: np.ndarray, fanout: int = 16):
        boxes = np.asarray(boxes, dtype=float).reshape(-1, 4)
        self.fanout = fanout
        self.size = len(boxes)
        order = self._str_order(boxes, np.arange(self.size))
        self.entry_ids = order
        self.entry_boxes = boxes[order]
        self.levels = []  # leaf level first; each (boxes, start, end)
        child_boxes = self.entry_boxes
        while len(child_boxes) > 0:
            n = len(child_boxes)
            starts = np.arange(0, n, fanout)
            ends = np.minimum(starts + fanout, n)
            node_boxes = np.column_stack([
                np.minimum.reduceat(child_boxes[:, 0], starts),
                np.maximum.reduceat(child_boxes[:, 1], starts),
                np.minimum.reduceat(child_boxes[:, 2], starts),
                np.maximum.reduceat(child_boxes[:, 3], starts),
            ])
            if len(node_boxes) == 1:
                self.levels.append((node_boxes, starts, ends))
                break
            # pack the next level: reorder these nodes so siblings are contiguous
            perm = self._str_order(node_boxes, np.arange(len(node_boxes)))
            self.levels.append((node_boxes[perm], starts[perm], ends[perm]))
            child_boxes = node_boxes[perm]

    def _str_order(self, boxes: np.ndarray, ids: np.ndarray) -> np.ndarray:
        n = len(ids)
        if n == 0:
            return ids
        cx = 0.5 * (boxes[ids, 2] + boxes[ids, 3])
        cy = 0.5 * (boxes[ids, 0] + boxes[ids, 1])
        n_leaves = math.ceil(n / self.fanout)
        n_slices = math.ceil(math.sqrt(n_leaves))
        per_slice = n_slices * self.fanout
        by_x = np.lexsort((ids, cx))
        out = []
        for s in range(0, n, per_slice):
            chunk = by_x[s:s + per_slice]
            out.append(chunk[np.lexsort((ids[chunk], cy[chunk]))])
        return ids[np.concatenate(out)]

    def query(self, box: Mbr) -> np.ndarray:
        """Ids of entries whose box intersects ``box``, ascending."""
        if self.size == 0:
            return np.empty(0, dtype=np.int64)
        root_boxes, starts, ends = self.levels[-1]
        hit = np.flatnonzero(mbr_intersects_array(root_boxes, box))
        spans = (starts[hit], ends[hit])
        for boxes, starts, ends in reversed(self.levels[:-1]):
            cand = _expand(*spans)
            if cand.size == 0:
                return np.empty(0, dtype=np.int64)
            cand = cand[mbr_intersects_array(boxes[cand], box)]
            spans = (starts[cand], ends[cand])
        cand = _expand(*spans)
        cand = cand[mbr_intersects_array(self.entry_boxes[cand], box)]
        return np.sort(self.entry_ids[cand])


def _expand(starts: np.ndarray, ends: np.ndarray) -> np.ndarray:
    if starts.size == 0:
        return np.empty(0, dtype=np.int64)
    lengths = ends - starts
    offsets = np.repeat(starts - np.concatenate(([0], np.cumsum(lengths)[:-1])), lengths)
    return np.arange(lengths.sum()) + offsets


class FovStore:
    """Immutable collection of FoVs with a spatial index over their rectangles."""

    def __init__(self, fovs):
        self.fovs: tuple[FoV, ...] = tuple(fovs)
        self.arrays = FovArrays.from_fovs(self.fovs)
        self.index = RTree(self.arrays.mbr)

    def __len__(self):
        return len(self.fovs)

    def query_indices(self, area: Mbr, t: TimeInterval) -> np.ndarray:
        ids = self.index.query(area)
        ts = self.arrays.t[ids]
        return ids[(ts >= t.t_min) & (ts <= t.t_max)]

    def scan_indices(self, area: Mbr, t: TimeInterval) -> np.ndarray:
        """Linear-scan equivalent of :meth:`query_indices`."""
        a = self.arrays
        mask = mbr_intersects_array(a.mbr, area) & (a.t >= t.t_min) & (a.t <= t.t_max)
        return np.flatnonzero(mask)


def get_fovs_in_range(store: FovStore, area: Mbr, t: TimeInterval) -> list[FoV]:
    return [store.fovs[i] for i in store.query_indices(area, t)]


def _parse_row(row: dict, line: int) -> FoV:
    values = {}
    for name, conv in (("t", int), ("lat", float), ("lon", float),
                       ("theta", float), ("r", float), ("alpha", float)):
        raw = row.get(name)
        if raw is None or raw.strip() == "":
            raise DatasetError(line, name, "missing value")
        try:
            values[name] = conv(raw)
        except ValueError:
            raise DatasetError(line, name, f"cannot parse {raw!r}") from None
        if conv is float and not math.isfinite(values[name]):
            raise DatasetError(line, name, f"non-finite value {raw!r}")
    checks = (("lat", -90.0 <= values["lat"] <= 90.0, "outside [-90, 90]"),
              ("lon", -180.0 <= values["lon"] <= 180.0, "outside [-180, 180]"),
              ("theta", 0.0 <= values["theta"] < 360.0, "outside [0, 360)"),
              ("r", values["r"] > 0.0, "must be > 0"),
              ("alpha", 0.0 < values["alpha"] <= 360.0, "outside (0, 360]"))
    for name, ok, msg in checks:
        if not ok:
            raise DatasetError(line, name, f"{values[name]} {msg}")
    try:
        return FoV(row.get("video_id") or "", values["t"],
                   GeoPoint(values["lat"], values["lon"]),
                   values["theta"], values["r"], values["alpha"])
    except ValueError as exc:
        raise DatasetError(line, "geometry", str(exc)) from None


def load(path) -> FovStore:
    """Read a dataset CSV (``video_id,t,lat,lon,theta,r,alpha``)."""
    fovs = []
    with open(path, newline="", encoding="utf-8") as fh:
        reader = csv.DictReader(fh)
        if reader.fieldnames is None:
            raise DatasetError(1, "header", "missing header")
        missing = [f for f in CSV_FIELDS if f not in reader.fieldnames]
        if missing:
            raise DatasetError(1, "header", f"missing columns {missing}")
        for row in reader:
            fovs.append(_parse_row(row, reader.line_num))
    return FovStore(fovs)


def write_csv(fovs, path) -> None:
    path = Path(path)
    with open(path, "w", newline="", encoding="utf-8") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(CSV_FIELDS)
        for f in fovs:
            w.writerow((f.video_id, f.t, repr(f.p.lat), repr(f.p.lon),
                        repr(f.theta), repr(f.r), repr(f.alpha)))
