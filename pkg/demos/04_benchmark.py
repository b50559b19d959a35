"""
Benchmarking detectors against a reference
==========================================

Run a small suite several times and summarize wall time, speedup and
agreement with the reference detector's top-k cells.
"""
from pathlib import Path

from fovpoi import Mbr, Query, load
from fovpoi.bench import parse_suite, run_benchmark

# the dataset from 03_clustering_and_sampling.py
out = Path("demo_out")
store = load(out / "city.csv")
lats = store.arrays.lat
lons = store.arrays.lon
area = Mbr(lats.min(), lats.max(), lons.min(), lons.max())

suite = parse_suite("""
optimized optimized            # reference
sample20  sample fraction=0.2
cis       cis c=6 f_c=0.5 f_i=0.05 stop=maxci threshold=0.1
""")
table = run_benchmark(store, Query(area, k=5), suite, repeats=5, seed=1)
print(table.format_summary())
table.write_csv(out / "bench.csv")
print("rows written:", len(table.rows))
