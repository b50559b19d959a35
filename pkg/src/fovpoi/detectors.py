"""Top-k POI detectors.

``detect_naive``
    every FoV against every cell of the query grid.
``detect_optimized``
    each FoV only against the cells under its bounding rectangle, skipping
    the angular term for circular FoVs. Same result as the naive detector.
``detect_single_sampling``
    the optimized detector on one uniform sample of the FoVs.
``detect_cis``
    k-means over camera locations, then per-cluster incremental sampling
    until a stopping criterion fires; cluster scores are scaled by the
    sampled fraction and merged into a global top-k.
"""
from __future__ import annotations

import math
import time
from concurrent.futures import ThreadPoolExecutor
from dataclasses import asdict, dataclass, field

import numpy as np

from .geometry import (M_PER_DEG_LAT, GeoPoint, Mbr, distance_array, mbr_intersects_array,
                       square_around)
from .grid import (DEFAULT_MAX_CELLS, CellRef, CiMatrix, GridSpec, accumulate_arrays,
                   cell_range_for_mbr, top_k, top_k_indices)
from .metrics import sum_min_distances
from .model import ModelParams
from .store import FovStore, TimeInterval

MAX_CI_DIFF = "max_ci_diff"
TOPK_DISTANCE = "topk_distance"
_DEFAULT_THRESHOLDS = {MAX_CI_DIFF: 0.1, TOPK_DISTANCE: 50.0}


@dataclass(frozen=True)
class Query:
    area: Mbr
    t: TimeInterval = field(default_factory=TimeInterval.everything)
    k: int = 5
    cell_len: float = 0.0001
    model: ModelParams = field(default_factory=ModelParams)
    max_cells: int = DEFAULT_MAX_CELLS

    def __post_init__(self):
        if self.k < 1:
            raise ValueError(f"k must be >= 1, got {self.k}")

    def grid(self) -> GridSpec:
        return GridSpec(self.area, self.cell_len, self.max_cells)


@dataclass(frozen=True)
class StopCriterion:
    kind: str = MAX_CI_DIFF
    threshold: float | None = None

    def __post_init__(self):
        if self.kind not in _DEFAULT_THRESHOLDS:
            raise ValueError(f"unknown stop criterion {self.kind!r}")
        if self.threshold is None:
            object.__setattr__(self, "threshold", _DEFAULT_THRESHOLDS[self.kind])
        if not self.threshold > 0:
            raise ValueError(f"threshold must be > 0, got {self.threshold}")


@dataclass(frozen=True)
class CisParams:
    c: int = 6
    f_c: float = 0.5
    f_i: float = 0.05
    stop: StopCriterion = field(default_factory=StopCriterion)
    seed: int = 0
    expand: float = 1.0
    threads: int = 1

    def __post_init__(self):
        if self.c < 1:
            raise ValueError(f"c must be >= 1, got {self.c}")
        for name in ("f_c", "f_i"):
            v = getattr(self, name)
            if not 0.0 < v <= 1.0:
                raise ValueError(f"{name} must be in (0, 1], got {v}")
        if not self.expand > 0:
            raise ValueError(f"expand must be > 0, got {self.expand}")
        if self.threads < 1:
            raise ValueError(f"threads must be >= 1, got {self.threads}")

    @property
    def max_iterations(self) -> int:
        return max(1, math.ceil(1.0 / self.f_i - 1e-9))


@dataclass
class Cluster:
    center: GeoPoint
    members: np.ndarray      # indices into the clustered point array
    points: np.ndarray       # (m, 2) member lat, lon
    bbox: Mbr | None = None


@dataclass
class ClusterReport:
    index: int
    center: tuple[float, float]
    rms_radius: float
    n_fovs: int
    iterations: int = 0
    fovs_processed: int = 0
    fraction: float = 0.0
    stop_reason: str = ""


@dataclass
class DetectionReport:
    detector: str
    timings: dict = field(default_factory=dict)  # seconds per phase
    fovs_in_range: int = 0
    fovs_processed: int = 0
    cell_updates: int = 0
    clusters: list[ClusterReport] = field(default_factory=list)
    notes: list[str] = field(default_factory=list)

    def to_dict(self) -> dict:
        return asdict(self)


@dataclass
class TopKResult:
    cells: list[CellRef]
    report: DetectionReport
    matrix: CiMatrix | None = None


@dataclass
class IterState:
    max_ci: float
    cells: list[CellRef]


def _sample_size(fraction: float, n: int) -> int:
    return min(n, max(1, int(math.floor(fraction * n + 0.5))))


def _finish(report: DetectionReport, t_start: float) -> None:
    report.timings["total"] = time.perf_counter() - t_start


def _full_grid(store: FovStore, query: Query, name: str, *, filtered: bool,
               shortcut: bool, sample=None) -> TopKResult:
    t0 = time.perf_counter()
    spec = query.grid()
    report = DetectionReport(name)
    ids = store.query_indices(query.area, query.t)
    report.fovs_in_range = int(ids.size)
    t1 = time.perf_counter()
    report.timings["range_query"] = t1 - t0
    if sample is not None and ids.size:
        ids = sample(ids)
    matrix = CiMatrix.zeros(spec)
    report.cell_updates = accumulate_arrays(matrix.values, spec, store.arrays, ids,
                                            query.model, filtered=filtered,
                                            circular_shortcut=shortcut)
    report.fovs_processed = int(ids.size)
    t2 = time.perf_counter()
    report.timings["accumulate"] = t2 - t1
    cells = top_k(matrix, query.k)
    report.timings["top_k"] = time.perf_counter() - t2
    _finish(report, t0)
    return TopKResult(cells, report, matrix)


def detect_naive(store: FovStore, query: Query) -> TopKResult:
    return _full_grid(store, query, "naive", filtered=False, shortcut=False)


def detect_optimized(store: FovStore, query: Query, circular_shortcut: bool = True) -> TopKResult:
    return _full_grid(store, query, "optimized", filtered=True, shortcut=circular_shortcut)


def detect_single_sampling(store: FovStore, query: Query, fraction: float,
                           seed: int = 0) -> TopKResult:
    if not 0.0 < fraction <= 1.0:
        raise ValueError(f"fraction must be in (0, 1], got {fraction}")
    rng = np.random.default_rng(seed)

    def sample(ids):
        return np.sort(rng.choice(ids, size=_sample_size(fraction, ids.size), replace=False))

    return _full_grid(store, query, "sample", filtered=True, shortcut=True, sample=sample)


def kmeans(points, c: int, seed: int = 0, tol_m: float = 0.1,
           max_rounds: int = 100) -> list[Cluster]:
    """Lloyd's k-means with k-means++ seeding on projected camera locations.

    ``points`` is an ``(n, 2)`` array of lat, lon (or a sequence of
    GeoPoint). Iterates until no centroid moves ``tol_m`` meters or more, or
    ``max_rounds``. A cluster left empty is re-seeded with the point
    farthest from its centroid. ``c`` is capped at the number of points.
    """
    if not isinstance(points, np.ndarray):
        points = np.array([(p.lat, p.lon) for p in points], dtype=float)
    pts = np.asarray(points, dtype=float).reshape(-1, 2)
    n = len(pts)
    if n == 0:
        raise ValueError("kmeans needs at least one point")
    if c < 1:
        raise ValueError(f"c must be >= 1, got {c}")
    c = min(c, n)
    kx = M_PER_DEG_LAT * math.cos(math.radians(float(pts[:, 0].mean())))
    X = np.column_stack([pts[:, 1] * kx, pts[:, 0] * M_PER_DEG_LAT])
    rng = np.random.default_rng(seed)

    centers = np.empty((c, 2))
    centers[0] = X[rng.integers(n)]
    d2 = ((X - centers[0]) ** 2).sum(axis=1)
    for j in range(1, c):
        total = d2.sum()
        pick = rng.integers(n) if total <= 0.0 else rng.choice(n, p=d2 / total)
        centers[j] = X[pick]
        d2 = np.minimum(d2, ((X - centers[j]) ** 2).sum(axis=1))

    def assign(cs):
        dist = ((X[:, None, :] - cs[None, :, :]) ** 2).sum(axis=2)
        lab = dist.argmin(axis=1)
        return lab, dist[np.arange(n), lab]

    for _ in range(max_rounds):
        labels, best = assign(centers)
        new = centers.copy()
        far = best.copy()
        for j in range(c):
            mask = labels == j
            if mask.any():
                new[j] = X[mask].mean(axis=0)
            else:
                pick = int(far.argmax())
                new[j] = X[pick]
                far[pick] = -1.0
        moved = np.sqrt(((new - centers) ** 2).sum(axis=1)).max()
        centers = new
        if moved < tol_m:
            break
    labels, _ = assign(centers)

    clusters = []
    for j in range(c):
        members = np.flatnonzero(labels == j)
        if members.size == 0:
            continue
        clusters.append(Cluster(GeoPoint(centers[j, 1] / M_PER_DEG_LAT, centers[j, 0] / kx),
                                members, pts[members]))
    return clusters


def rms_radius(cluster: Cluster) -> float:
    """Root mean square distance in meters of the members from the center."""
    d = distance_array(cluster.center.lat, cluster.center.lon,
                       cluster.points[:, 0], cluster.points[:, 1])
    return float(np.sqrt(np.mean(d * d)))


def stop_satisfied(criterion: StopCriterion, prev: IterState | None, cur: IterState) -> bool:
    if prev is None:
        return False
    if criterion.kind == MAX_CI_DIFF:
        return abs(cur.max_ci - prev.max_ci) < criterion.threshold
    return sum_min_distances(prev.cells, cur.cells).sum_min_distance < criterion.threshold


def _window_cells(spec: GridSpec, window, idx, scores) -> list[CellRef]:
    x0, x1, y0, _ = window
    width = x1 - x0
    out = []
    for i, s in zip(idx.tolist(), scores.tolist()):
        wy, wx = divmod(i, width)
        out.append(CellRef(x0 + wx, y0 + wy, spec.center(x0 + wx, y0 + wy), s))
    return out


@dataclass
class _ClusterJob:
    report: ClusterReport
    window: tuple[int, int, int, int]
    fovs: np.ndarray   # store indices, ascending
    perm: np.ndarray   # pre-drawn sampling order over ``fovs``


def _run_cluster(job: _ClusterJob, store: FovStore, spec: GridSpec, query: Query,
                 params: CisParams):
    x0, x1, y0, y1 = job.window
    values = np.zeros((y1 - y0, x1 - x0))
    m = job.fovs.size
    batch = max(1, math.ceil(params.f_i * m - 1e-9))
    prev = None
    used = updates = it = 0
    while True:
        sel = np.sort(job.fovs[job.perm[used:used + batch]])
        used += sel.size
        updates += accumulate_arrays(values, spec, store.arrays, sel, query.model,
                                     filtered=True, circular_shortcut=True, window=job.window)
        it += 1
        idx, scores = top_k_indices(values, query.k)
        cur = IterState(float(values.max()), _window_cells(spec, job.window, idx, scores))
        if stop_satisfied(params.stop, prev, cur):
            reason = "criterion"
            break
        if it >= params.max_iterations:
            reason = "max_iterations"
            break
        if used >= m:
            reason = "exhausted"
            break
        prev = cur
    p = min(it * params.f_i, 1.0)
    rep = job.report
    rep.iterations, rep.fovs_processed, rep.fraction, rep.stop_reason = it, used, p, reason
    return cur.cells, p, values, updates


def detect_cis(store: FovStore, query: Query, params: CisParams = CisParams(),
               heatmap: bool = False) -> TopKResult:
    """Clustering and incremental sampling detector.

    With ``heatmap`` set, ``result.matrix`` holds the scaled cluster
    matrices merged by maximum (zero outside every cluster window).
    """
    t0 = time.perf_counter()
    spec = query.grid()
    report = DetectionReport("cis")
    F = store.query_indices(query.area, query.t)
    report.fovs_in_range = int(F.size)
    t1 = time.perf_counter()
    report.timings["range_query"] = t1 - t0
    if F.size == 0:
        _finish(report, t0)
        return TopKResult([], report, CiMatrix.zeros(spec) if heatmap else None)

    # all random draws happen here, in a fixed order, before any accumulation
    rng = np.random.default_rng(params.seed)
    arr = store.arrays
    S = np.sort(rng.choice(F, size=_sample_size(params.f_c, F.size), replace=False))
    clusters = kmeans(np.column_stack([arr.lat[S], arr.lon[S]]), params.c,
                      seed=int(rng.integers(2**63)))
    if len(clusters) < params.c:
        report.notes.append(f"cluster count reduced from {params.c} to {len(clusters)}")
    jobs = []
    for j, cl in enumerate(clusters):
        radius = rms_radius(cl)
        rep = ClusterReport(j, (cl.center.lat, cl.center.lon), radius, 0)
        report.clusters.append(rep)
        cl.bbox = square_around(cl.center, radius * params.expand).intersection(query.area)
        if cl.bbox is None:
            rep.stop_reason = "skipped: outside area"
            continue
        window = cell_range_for_mbr(spec, cl.bbox)
        fc = F[mbr_intersects_array(arr.mbr[F], cl.bbox)]
        rep.n_fovs = int(fc.size)
        if fc.size == 0 or window[0] == window[1]:
            rep.stop_reason = "skipped: no fovs"
            continue
        jobs.append(_ClusterJob(rep, window, fc, rng.permutation(fc.size)))
    t2 = time.perf_counter()
    report.timings["clustering"] = t2 - t1

    def run(job):
        return _run_cluster(job, store, spec, query, params)

    if params.threads > 1 and len(jobs) > 1:
        with ThreadPoolExecutor(params.threads) as pool:
            outcomes = list(pool.map(run, jobs))
    else:
        outcomes = [run(job) for job in jobs]
    t3 = time.perf_counter()
    report.timings["sampling"] = t3 - t2

    best: dict[tuple[int, int], CellRef] = {}
    matrix = CiMatrix.zeros(spec) if heatmap else None
    for job, (cells, p, values, updates) in zip(jobs, outcomes):
        report.fovs_processed += job.report.fovs_processed
        report.cell_updates += updates
        for cell in cells:
            scaled = CellRef(cell.x, cell.y, cell.center, cell.score / p)
            old = best.get((cell.y, cell.x))
            if old is None or scaled.score > old.score:
                best[(cell.y, cell.x)] = scaled
        if matrix is not None:
            x0, x1, y0, y1 = job.window
            np.maximum(matrix.values[y0:y1, x0:x1], values / p,
                       out=matrix.values[y0:y1, x0:x1])
    ranked = sorted(best.values(), key=lambda c: (-c.score, c.y, c.x))[:query.k]
    report.timings["merge"] = time.perf_counter() - t3
    _finish(report, t0)
    return TopKResult(ranked, report, matrix)


DETECTORS = {
    "naive": detect_naive,
    "optimized": detect_optimized,
    "sample": detect_single_sampling,
    "cis": detect_cis,
}
