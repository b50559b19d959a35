"""Benchmark runner comparing detector configurations against a reference."""
from __future__ import annotations

import csv
import statistics
import time
from dataclasses import dataclass, field

from .detectors import (CisParams, Query, StopCriterion, TopKResult, detect_cis, detect_naive,
                        detect_optimized, detect_single_sampling)
from .grid import warmup
from .metrics import sum_min_distances
from .store import FovStore

CSV_COLUMNS = ("detector", "params", "run", "seed", "wall_ms", "fovs_processed",
               "cell_updates", "sum_min_dist_m", "correct_frac")

STOP_ALIASES = {"maxci": "max_ci_diff", "max_ci_diff": "max_ci_diff",
                "topkdist": "topk_distance", "topk_distance": "topk_distance"}


class BenchmarkError(RuntimeError):
    pass


@dataclass(frozen=True)
class DetectorConfig:
    """A named detector plus its parameters.

    ``params`` keys: ``fraction`` (sample); ``c``, ``f_c``, ``f_i``, ``stop``,
    ``threshold``, ``expand``, ``threads`` (cis); ``shortcut`` (optimized).
    """

    name: str
    algo: str
    params: dict = field(default_factory=dict)

    def __post_init__(self):
        if self.algo not in ("naive", "optimized", "sample", "cis"):
            raise ValueError(f"unknown detector {self.algo!r}")
        if self.algo == "cis":
            self.cis_params(0)  # fail on bad parameters at parse time

    @property
    def stochastic(self) -> bool:
        return self.algo in ("sample", "cis")

    def params_text(self) -> str:
        return ";".join(f"{k}={v}" for k, v in sorted(self.params.items()))

    def cis_params(self, seed: int) -> CisParams:
        p = self.params
        stop = StopCriterion(STOP_ALIASES[p.get("stop", "maxci")],
                             float(p["threshold"]) if "threshold" in p else None)
        return CisParams(c=int(p.get("c", 6)), f_c=float(p.get("f_c", 0.5)),
                         f_i=float(p.get("f_i", 0.05)), stop=stop, seed=seed,
                         expand=float(p.get("expand", 1.0)), threads=int(p.get("threads", 1)))

    def run(self, store: FovStore, query: Query, seed: int) -> TopKResult:
        if self.algo == "naive":
            return detect_naive(store, query)
        if self.algo == "optimized":
            shortcut = str(self.params.get("shortcut", "on")).lower() not in ("off", "0", "false")
            return detect_optimized(store, query, circular_shortcut=shortcut)
        if self.algo == "sample":
            return detect_single_sampling(store, query, float(self.params.get("fraction", 0.5)),
                                          seed)
        return detect_cis(store, query, self.cis_params(seed))


@dataclass
class BenchRow:
    detector: str
    params: str
    run: int
    seed: int | None
    wall_ms: float
    fovs_processed: int
    cell_updates: int
    sum_min_dist_m: float
    correct_frac: float


@dataclass
class BenchSummary:
    detector: str
    mean_ms: float
    min_ms: float
    max_ms: float
    speedup: float
    mean_sum_min_dist_m: float
    mean_correct_frac: float


@dataclass
class BenchmarkTable:
    reference: str
    rows: list[BenchRow]
    summary: list[BenchSummary]

    def write_csv(self, path) -> None:
        with open(path, "w", newline="", encoding="utf-8") as fh:
            w = csv.writer(fh, lineterminator="\n")
            w.writerow(CSV_COLUMNS)
            for r in self.rows:
                w.writerow((r.detector, r.params, r.run, "" if r.seed is None else r.seed,
                            f"{r.wall_ms:.3f}", r.fovs_processed, r.cell_updates,
                            f"{r.sum_min_dist_m:.6f}", f"{r.correct_frac:.6f}"))

    def format_summary(self) -> str:
        lines = [f"{'detector':<16}{'mean_ms':>12}{'speedup':>10}{'sum_dmin_m':>14}"
                 f"{'correct':>10}"]
        for s in self.summary:
            lines.append(f"{s.detector:<16}{s.mean_ms:>12.2f}{s.speedup:>9.2f}x"
                         f"{s.mean_sum_min_dist_m:>14.2f}{s.mean_correct_frac:>10.3f}")
        return "\n".join(lines)


def run_benchmark(store: FovStore, query: Query, suite, repeats: int = 1, seed: int = 0,
                  reference: str | None = None, tol: float = 20.0) -> BenchmarkTable:
    """Run every config ``repeats`` times and compare with the reference.

    The reference defaults to the first config. Stochastic detectors use
    seeds ``seed .. seed + repeats - 1``. Runs are sequential; wall time
    covers the detector call, range query included.
    """
    if repeats < 1:
        raise ValueError(f"repeats must be >= 1, got {repeats}")
    suite = list(suite)
    if not suite:
        raise ValueError("empty suite")
    names = [c.name for c in suite]
    if len(set(names)) != len(names):
        raise ValueError(f"duplicate detector names in suite: {names}")
    ref_name = reference or suite[0].name
    if ref_name not in names:
        raise ValueError(f"reference {ref_name!r} not in suite")
    ordered = sorted(suite, key=lambda c: c.name != ref_name)
    warmup()

    ref_cells = None
    rows: list[BenchRow] = []
    for cfg in ordered:
        for run in range(repeats):
            s = seed + run
            t0 = time.perf_counter()
            try:
                res = cfg.run(store, query, s)
            except Exception as exc:
                if cfg.name == ref_name:
                    raise BenchmarkError(f"reference detector {ref_name!r} failed: {exc}") from exc
                raise
            wall = (time.perf_counter() - t0) * 1000.0
            if ref_cells is None:
                ref_cells = res.cells
            m = sum_min_distances(res.cells, ref_cells, tol)
            frac = m.correct_fraction if ref_cells else (1.0 if not res.cells else 0.0)
            rows.append(BenchRow(cfg.name, cfg.params_text(), run,
                                 s if cfg.stochastic else None, wall,
                                 res.report.fovs_processed, res.report.cell_updates,
                                 m.sum_min_distance, frac))

    ref_mean = statistics.fmean(r.wall_ms for r in rows if r.detector == ref_name)
    summary = []
    for cfg in suite:
        mine = [r for r in rows if r.detector == cfg.name]
        walls = [r.wall_ms for r in mine]
        mean = statistics.fmean(walls)
        summary.append(BenchSummary(cfg.name, mean, min(walls), max(walls),
                                    ref_mean / mean if mean > 0 else float("inf"),
                                    statistics.fmean(r.sum_min_dist_m for r in mine),
                                    statistics.fmean(r.correct_frac for r in mine)))
    return BenchmarkTable(ref_name, rows, summary)


def parse_suite(text: str) -> list[DetectorConfig]:
    """Parse suite lines ``name algo [key=value ...]``; the first is the reference."""
    out = []
    for lineno, raw in enumerate(text.splitlines(), 1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        parts = line.split()
        if len(parts) < 2:
            raise ValueError(f"suite line {lineno}: expected 'name algo [key=value ...]'")
        params = {}
        for item in parts[2:]:
            if "=" not in item:
                raise ValueError(f"suite line {lineno}: bad parameter {item!r}")
            k, v = item.split("=", 1)
            params[k] = v
        try:
            out.append(DetectorConfig(parts[0], parts[1], params))
        except (ValueError, KeyError) as exc:
            raise ValueError(f"suite line {lineno}: {exc}") from None
    if not out:
        raise ValueError("suite is empty")
    return out
