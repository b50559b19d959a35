"""
Sampling-based detection
========================

Single sampling processes a random share of the FoVs. The clustering and
incremental sampling detector (C&IS) first clusters camera positions, then
samples each cluster in small batches until its top cells settle.
"""
import math
import time
from pathlib import Path

import numpy as np

from fovpoi import (CisParams, GeoPoint, Mbr, Query, StopCriterion, correct_fraction,
                    detect_cis, detect_optimized, detect_single_sampling, load)
from fovpoi.datagen import DatasetProfile, generate
from fovpoi.geometry import M_PER_DEG_LAT
from fovpoi.grid import warmup

out = Path("demo_out")
out.mkdir(exist_ok=True)

lat0, lon0, side = 34.05, -118.25, 3000.0
area = Mbr(lat0, lat0 + side / M_PER_DEG_LAT,
           lon0, lon0 + side / (M_PER_DEG_LAT * math.cos(math.radians(lat0))))
rng = np.random.default_rng(5)
hotspots = [(GeoPoint(rng.uniform(area.lat_min + 0.005, area.lat_max - 0.005),
                      rng.uniform(area.lon_min + 0.005, area.lon_max - 0.005)), w)
            for w in (8, 7, 6, 5, 4, 3, 2, 1)]
generate(DatasetProfile(area, n_videos=2000, hotspots=hotspots, placement_sigma=40.0,
                        alpha_mix=((160.0, 0.7), (360.0, 0.3)), seed=42),
         out / "city.csv")
store = load(out / "city.csv")
query = Query(area, k=5)
warmup()

t = time.perf_counter()
ref = detect_optimized(store, query)
t_ref = time.perf_counter() - t
print(f"optimized: {t_ref:.2f} s over {ref.report.fovs_processed} FoVs")

# one uniform sample of 20%
res = detect_single_sampling(store, query, fraction=0.2, seed=1)
print("single sampling 20%: correct", correct_fraction(res.cells, ref.cells))

# C&IS with the defaults: 6 clusters, 50% of cameras clustered, 5% batches
for seed in (1, 2, 3):
    t = time.perf_counter()
    res = detect_cis(store, query, CisParams(seed=seed))
    dt = time.perf_counter() - t
    iters = [c.iterations for c in res.report.clusters]
    print(f"C&IS seed {seed}: {dt:.3f} s ({t_ref / dt:.0f}x faster), "
          f"correct {correct_fraction(res.cells, ref.cells):.1f}, iterations per cluster {iters}")

# a stricter criterion on top-k movement runs more batches per cluster
res = detect_cis(store, query, CisParams(seed=1, stop=StopCriterion("topk_distance", 5.0)))
print("top-k distance criterion, 5 m:", [c.stop_reason for c in res.report.clusters])
