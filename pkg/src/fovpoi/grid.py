"""Query grid, capture-intention matrix and per-FoV accumulation.

Cells are addressed by ``(x, y)`` with ``x`` along longitude and ``y`` along
latitude; cell ``(x, y)`` spans the half-open square
``[lon_min + x*l, lon_min + (x+1)*l) x [lat_min + y*l, lat_min + (y+1)*l)``
and is represented by its center. Matrices are row-major with ``y`` outer.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Sequence

import numpy as np
from numba import njit

from .geometry import M_PER_DEG_LAT, FoV, GeoPoint, Mbr
from .model import ModelParams, normalize

# 2 GiB of float64 entries
DEFAULT_MAX_CELLS = (2 * 1024**3) // 8

# tolerance when turning an area span into a cell count, so that spans which
# are an exact multiple of the cell length in decimal do not gain a column
_DIM_EPS = 1e-9


class CapacityError(RuntimeError):
    """The requested grid exceeds the configured memory cap."""

    def __init__(self, required: int, allowed: int):
        super().__init__(f"grid needs {required} cells, cap is {allowed}")
        self.required = required
        self.allowed = allowed


@dataclass(frozen=True)
class GridSpec:
    area: Mbr
    cell_len: float = 0.0001
    max_cells: int = DEFAULT_MAX_CELLS
    xdim: int = field(init=False)
    ydim: int = field(init=False)

    def __post_init__(self):
        if not (math.isfinite(self.cell_len) and self.cell_len > 0.0):
            raise ValueError(f"cell_len must be > 0, got {self.cell_len}")
        a = self.area
        xdim = max(1, math.ceil((a.lon_max - a.lon_min) / self.cell_len - _DIM_EPS))
        ydim = max(1, math.ceil((a.lat_max - a.lat_min) / self.cell_len - _DIM_EPS))
        if xdim * ydim > self.max_cells:
            raise CapacityError(xdim * ydim, self.max_cells)
        object.__setattr__(self, "xdim", xdim)
        object.__setattr__(self, "ydim", ydim)

    @property
    def n_cells(self) -> int:
        return self.xdim * self.ydim

    def center(self, x: int, y: int) -> GeoPoint:
        return GeoPoint(self.area.lat_min + (y + 0.5) * self.cell_len,
                        self.area.lon_min + (x + 0.5) * self.cell_len)


@dataclass
class CiMatrix:
    spec: GridSpec
    values: np.ndarray

    @classmethod
    def zeros(cls, spec: GridSpec) -> CiMatrix:
        return cls(spec, np.zeros((spec.ydim, spec.xdim), dtype=np.float64))


@dataclass(frozen=True)
class CellRef:
    x: int
    y: int
    center: GeoPoint
    score: float


@dataclass(frozen=True)
class FovArrays:
    """Column view of a sequence of FoVs, as consumed by the kernels."""

    lat: np.ndarray
    lon: np.ndarray
    theta: np.ndarray
    r: np.ndarray
    alpha: np.ndarray
    mbr: np.ndarray  # (n, 4): lat_min, lat_max, lon_min, lon_max
    t: np.ndarray

    def __len__(self):
        return len(self.lat)

    @classmethod
    def from_fovs(cls, fovs: Sequence[FoV]) -> FovArrays:
        n = len(fovs)
        mbr = np.empty((n, 4))
        for i, f in enumerate(fovs):
            mbr[i] = f.mbr.as_tuple()
        return cls(
            lat=np.array([f.p.lat for f in fovs], dtype=float),
            lon=np.array([f.p.lon for f in fovs], dtype=float),
            theta=np.array([f.theta for f in fovs], dtype=float),
            r=np.array([f.r for f in fovs], dtype=float),
            alpha=np.array([f.alpha for f in fovs], dtype=float),
            mbr=mbr,
            t=np.array([f.t for f in fovs], dtype=np.int64),
        )


def cell_range_for_mbr(spec: GridSpec, box: Mbr) -> tuple[int, int, int, int]:
    """Half-open ``(x_min, x_max, y_min, y_max)`` of cells overlapping ``box``."""
    a, l = spec.area, spec.cell_len
    x0 = max(0, math.floor((box.lon_min - a.lon_min) / l))
    x1 = min(spec.xdim, math.floor((box.lon_max - a.lon_min) / l) + 1)
    y0 = max(0, math.floor((box.lat_min - a.lat_min) / l))
    y1 = min(spec.ydim, math.floor((box.lat_max - a.lat_min) / l) + 1)
    if x1 <= x0 or y1 <= y0:
        return (x0, x0, y0, y0)
    return (x0, x1, y0, y1)


@njit(cache=True, nogil=True)
def _accumulate_kernel(out, lat0, lon0, cell, wx0, wx1, wy0, wy1,
                       plat, plon, theta, r, alpha, mbr, order,
                       sigma_a, sigma_d, use_mbr, shortcut):
    m = 111_320.0
    sqrt2pi = math.sqrt(2.0 * math.pi)
    norm_a = 1.0 / (sqrt2pi * sigma_a)
    norm_d = 1.0 / (sqrt2pi * sigma_d)
    inv_2a = 1.0 / (2.0 * sigma_a * sigma_a)
    inv_2d = 1.0 / (2.0 * sigma_d * sigma_d)
    updates = 0
    for k in range(order.shape[0]):
        i = order[k]
        x0, x1, y0, y1 = wx0, wx1, wy0, wy1
        if use_mbr:
            x0 = max(wx0, int(math.floor((mbr[i, 2] - lon0) / cell)))
            x1 = min(wx1, int(math.floor((mbr[i, 3] - lon0) / cell)) + 1)
            y0 = max(wy0, int(math.floor((mbr[i, 0] - lat0) / cell)))
            y1 = min(wy1, int(math.floor((mbr[i, 1] - lat0) / cell)) + 1)
            if x1 <= x0 or y1 <= y0:
                continue
        updates += (x1 - x0) * (y1 - y0)
        pl, pn, th, rr, al = plat[i], plon[i], theta[i], r[i], alpha[i]
        half = 0.5 * al
        circ = al == 360.0
        for y in range(y0, y1):
            clat = lat0 + (y + 0.5) * cell
            dy = (clat - pl) * m
            if use_mbr and abs(dy) > rr * (1.0 + 1e-9):
                continue
            cosm = math.cos(math.radians(0.5 * (pl + clat)))
            xa, xb = x0, x1
            if use_mbr:
                # columns that can lie within r on this row, padded by a cell;
                # the exact distance test below still decides
                half_w = math.sqrt(max(0.0, rr * rr - dy * dy)) * (1.0 + 1e-9)
                span = half_w / (m * cosm)
                xa = max(x0, int(math.floor((pn - span - lon0) / cell - 0.5)) - 1)
                xb = min(x1, int(math.floor((pn + span - lon0) / cell - 0.5)) + 2)
            for x in range(xa, xb):
                clon = lon0 + (x + 0.5) * cell
                dx = (clon - pn) * m * cosm
                d = math.sqrt(dx * dx + dy * dy)
                if d > rr:
                    continue
                if circ and shortcut:
                    v = math.exp(-d * d * inv_2d) * norm_d
                else:
                    if dx == 0.0 and dy == 0.0:
                        b = 0.0
                    else:
                        b = math.degrees(math.atan2(dx, dy)) % 360.0
                    delta = abs(th - b)
                    if 360.0 - delta < delta:
                        delta = 360.0 - delta
                    if delta > half:
                        continue
                    if circ:
                        ca = 1.0
                    else:
                        ca = math.exp(-delta * delta * inv_2a) * norm_a
                    v = ca * (math.exp(-d * d * inv_2d) * norm_d)
                if v > 0.0:
                    out[y - wy0, x - wx0] += v
    return updates


def _as_arrays(fovs) -> FovArrays:
    if isinstance(fovs, FovArrays):
        return fovs
    return FovArrays.from_fovs(list(fovs))


def accumulate_arrays(values: np.ndarray, spec: GridSpec, arrays: FovArrays,
                      order: np.ndarray, params: ModelParams, *,
                      filtered: bool, circular_shortcut: bool,
                      window: tuple[int, int, int, int] | None = None) -> int:
    """Add the contributions of ``arrays[order]`` into ``values``.

    ``values`` covers the cell window ``(x_min, x_max, y_min, y_max)`` of
    ``spec`` (the whole grid when ``window`` is None). Returns the number of
    cell evaluations performed.
    """
    if window is None:
        window = (0, spec.xdim, 0, spec.ydim)
    x0, x1, y0, y1 = window
    if values.shape != (y1 - y0, x1 - x0):
        raise ValueError(f"values shape {values.shape} does not match window {window}")
    order = np.ascontiguousarray(order, dtype=np.int64)
    if order.size == 0 or values.size == 0:
        return 0
    return int(_accumulate_kernel(
        values, spec.area.lat_min, spec.area.lon_min, spec.cell_len, x0, x1, y0, y1,
        arrays.lat, arrays.lon, arrays.theta, arrays.r, arrays.alpha, arrays.mbr, order,
        params.sigma_a, params.sigma_d, filtered, circular_shortcut))


def accumulate_naive(matrix: CiMatrix, fovs, params: ModelParams) -> int:
    """Evaluate every FoV against every cell of the grid."""
    arr = _as_arrays(fovs)
    return accumulate_arrays(matrix.values, matrix.spec, arr, np.arange(len(arr)), params,
                             filtered=False, circular_shortcut=False)


def accumulate_filtered(matrix: CiMatrix, fovs, params: ModelParams,
                        circular_shortcut: bool = True) -> int:
    """Evaluate each FoV only on the cells overlapping its bounding rectangle.

    Produces the same matrix as :func:`accumulate_naive`, since cells outside
    the rectangle receive exactly zero.
    """
    arr = _as_arrays(fovs)
    return accumulate_arrays(matrix.values, matrix.spec, arr, np.arange(len(arr)), params,
                             filtered=True, circular_shortcut=circular_shortcut)


def top_k_indices(values: np.ndarray, k: int) -> tuple[np.ndarray, np.ndarray]:
    """Row-major flat indices and scores of the ``k`` best positive entries.

    Sorted by descending score, ties by ascending flat index.
    """
    if k < 1:
        raise ValueError(f"k must be >= 1, got {k}")
    flat = values.ravel()
    pos = np.flatnonzero(flat > 0.0)
    if pos.size > k:
        kth = np.partition(flat[pos], pos.size - k)[pos.size - k]
        pos = pos[flat[pos] >= kth]
    scores = flat[pos]
    order = np.lexsort((pos, -scores))[:k]
    return pos[order], scores[order]


def top_k(matrix: CiMatrix, k: int) -> list[CellRef]:
    idx, scores = top_k_indices(matrix.values, k)
    spec = matrix.spec
    out = []
    for i, s in zip(idx.tolist(), scores.tolist()):
        y, x = divmod(i, spec.xdim)
        out.append(CellRef(x, y, spec.center(x, y), s))
    return out


def write_heatmap_csv(matrix: CiMatrix, path) -> None:
    """Write ``x,y,lat,lon,value`` rows of the normalized matrix."""
    spec = matrix.spec
    vals = normalize(matrix).values
    a, l = spec.area, spec.cell_len
    with open(path, "w", encoding="utf-8", newline="") as fh:
        fh.write("x,y,lat,lon,value\n")
        for y in range(spec.ydim):
            lat = a.lat_min + (y + 0.5) * l
            row = vals[y]
            for x in range(spec.xdim):
                fh.write(f"{x},{y},{lat!r},{a.lon_min + (x + 0.5) * l!r},{float(row[x])!r}\n")


def write_heatmap_pgm(matrix: CiMatrix, path) -> None:
    """Write an ASCII (P2) 8-bit PGM; the first image row is the northmost."""
    spec = matrix.spec
    gray = np.rint(255.0 * normalize(matrix).values).astype(np.int64)
    with open(path, "w", encoding="ascii") as fh:
        fh.write(f"P2\n{spec.xdim} {spec.ydim}\n255\n")
        for y in range(spec.ydim - 1, -1, -1):
            fh.write(" ".join(map(str, gray[y].tolist())))
            fh.write("\n")


def warmup() -> None:
    """Compile the accumulation kernel ahead of any timed work."""
    spec = GridSpec(Mbr(0.0, 0.001, 0.0, 0.001))
    arr = FovArrays.from_fovs([FoV("w", 0, GeoPoint(0.0005, 0.0005), 0.0, 50.0, 60.0)])
    for filtered in (False, True):
        for shortcut in (False, True):
            accumulate_arrays(np.zeros((spec.ydim, spec.xdim)), spec, arr, np.arange(1),
                              ModelParams(), filtered=filtered, circular_shortcut=shortcut)
