"""
Area and time range queries on the FoV index
============================================

The store indexes FoV bounding rectangles in an R-tree. A range query
returns every FoV whose rectangle meets the area and whose timestamp falls
in the interval.
"""
import time

import numpy as np

from fovpoi import FoV, GeoPoint, Mbr, TimeInterval, get_fovs_in_range
from fovpoi.store import FovStore

rng = np.random.default_rng(0)
fovs = [FoV(f"v{i}", int(rng.integers(0, 86_400)),
            GeoPoint(34.0 + rng.random() * 0.1, -118.3 + rng.random() * 0.1),
            float(rng.uniform(0, 360)), float(rng.uniform(10, 500)),
            float(rng.choice([60.0, 160.0, 360.0]))) for i in range(50_000)]

t = time.perf_counter()
store = FovStore(fovs)
print(f"indexed {len(store)} FoVs in {time.perf_counter() - t:.2f} s")

area = Mbr(34.04, 34.05, -118.26, -118.25)
morning = TimeInterval(6 * 3600, 12 * 3600)

t = time.perf_counter()
ids = store.query_indices(area, morning)
t_tree = time.perf_counter() - t
t = time.perf_counter()
scan = store.scan_indices(area, morning)
t_scan = time.perf_counter() - t
print(f"{ids.size} FoVs; R-tree {1e3 * t_tree:.2f} ms, linear scan {1e3 * t_scan:.2f} ms,"
      f" same answer: {np.array_equal(ids, scan)}")

for f in get_fovs_in_range(store, area, morning)[:3]:
    print(f.video_id, f.t, f.p, f"theta={f.theta:.1f}", f"r={f.r:.0f}", f"alpha={f.alpha:.0f}")
