import math

import numpy as np
import pytest

from _data import square_area, make_dataset
from fovpoi import (CisParams, GeoPoint, Mbr, Query, StopCriterion, detect_cis, detect_naive,
                    detect_optimized, detect_single_sampling, kmeans, load, rms_radius)
from fovpoi.detectors import DETECTORS, Cluster, IterState, stop_satisfied
from fovpoi.geometry import M_PER_DEG_LAT
from fovpoi.grid import CellRef

AREA = square_area(1000.0)


@pytest.fixture(scope="module")
def store(tmp_path_factory):
    path = tmp_path_factory.mktemp("det") / "d.csv"
    make_dataset(path, AREA, n_videos=300, frames=5, variant="70pct160", seed=11,
                 weights=(4, 3, 2, 1), placement_sigma=40.0)
    return load(path)


def key(cells):
    return [(c.x, c.y) for c in cells]


def test_registry():
    assert set(DETECTORS) == {"naive", "optimized", "sample", "cis"}


def test_naive_equals_optimized(store):
    q = Query(AREA, k=10)
    a, b = detect_naive(store, q), detect_optimized(store, q)
    np.testing.assert_array_equal(a.matrix.values, b.matrix.values)
    assert key(a.cells) == key(b.cells)
    assert [c.score for c in a.cells] == [c.score for c in b.cells]
    assert a.report.cell_updates > b.report.cell_updates
    assert a.report.fovs_processed == b.report.fovs_processed == a.report.fovs_in_range


def test_optimized_without_shortcut_same_result(store):
    q = Query(AREA, k=10)
    a = detect_optimized(store, q, circular_shortcut=True)
    b = detect_optimized(store, q, circular_shortcut=False)
    np.testing.assert_array_equal(a.matrix.values, b.matrix.values)


def test_empty_area(store):
    q = Query(Mbr(0.0, 0.001, 0.0, 0.001), k=5)
    for name in ("naive", "optimized"):
        assert DETECTORS[name](store, q).cells == []
    assert detect_single_sampling(store, q, 0.5).cells == []
    res = detect_cis(store, q)
    assert res.cells == [] and res.report.fovs_in_range == 0


def test_single_sampling(store):
    q = Query(AREA, k=5)
    full = detect_optimized(store, q)
    one = detect_single_sampling(store, q, 1.0, seed=3)
    assert key(one.cells) == key(full.cells)
    a = detect_single_sampling(store, q, 0.3, seed=3)
    b = detect_single_sampling(store, q, 0.3, seed=3)
    assert key(a.cells) == key(b.cells)
    assert a.report.fovs_processed == round(0.3 * full.report.fovs_in_range)
    with pytest.raises(ValueError):
        detect_single_sampling(store, q, 0.0)


def test_cis_deterministic_and_thread_independent(store):
    q = Query(AREA, k=5)
    a = detect_cis(store, q, CisParams(seed=7))
    b = detect_cis(store, q, CisParams(seed=7))
    c = detect_cis(store, q, CisParams(seed=7, threads=4))
    assert key(a.cells) == key(b.cells) == key(c.cells)
    assert [x.score for x in a.cells] == [x.score for x in c.cells]
    assert [r.iterations for r in a.report.clusters] == [r.iterations for r in c.report.clusters]


def test_cis_single_full_cluster_equals_optimized(store):
    # one cluster whose box covers the area, everything in one batch: p = 1
    q = Query(AREA, k=10)
    params = CisParams(c=1, f_c=1.0, f_i=1.0, expand=1e6, seed=0)
    res = detect_cis(store, q, params)
    ref = detect_optimized(store, q)
    assert key(res.cells) == key(ref.cells)
    assert [c.score for c in res.cells] == [c.score for c in ref.cells]
    (cl,) = res.report.clusters
    assert cl.iterations == 1 and cl.fraction == 1.0


def test_cis_infinite_threshold_stops_at_second_iteration(store):
    q = Query(AREA, k=5)
    params = CisParams(stop=StopCriterion("max_ci_diff", math.inf))
    res = detect_cis(store, q, params)
    for cl in res.report.clusters:
        if cl.n_fovs and cl.iterations:
            assert cl.iterations == min(2, math.ceil(cl.n_fovs / max(1, math.ceil(0.05 * cl.n_fovs))))
            assert cl.stop_reason in ("criterion", "exhausted")


def test_cis_iteration_cap(store):
    q = Query(AREA, k=5)
    params = CisParams(f_i=0.3, stop=StopCriterion("topk_distance", 1e-12))
    res = detect_cis(store, q, params)
    assert params.max_iterations == 4
    assert all(cl.iterations <= 4 for cl in res.report.clusters)
    assert all(cl.fraction == pytest.approx(min(1.0, 0.3 * cl.iterations))
               for cl in res.report.clusters if cl.iterations)


def test_cis_scores_scaled_by_fraction(store):
    q = Query(AREA, k=5)
    params = CisParams(c=1, f_c=1.0, f_i=0.5, expand=1e6,
                       stop=StopCriterion("topk_distance", 1e-12))
    res = detect_cis(store, q, params, heatmap=True)
    (cl,) = res.report.clusters
    assert cl.iterations == 2 and cl.fraction == 1.0
    ref = detect_optimized(store, q)
    np.testing.assert_allclose(res.matrix.values, ref.matrix.values, rtol=1e-12)


def test_cis_heatmap_holds_top_cells(store):
    q = Query(AREA, k=5)
    res = detect_cis(store, q, CisParams(seed=2), heatmap=True)
    for c in res.cells:
        assert res.matrix.values[c.y, c.x] == pytest.approx(c.score, rel=1e-12)


def test_cis_params_validation():
    for bad in (dict(c=0), dict(f_c=0.0), dict(f_i=1.5), dict(expand=0.0), dict(threads=0)):
        with pytest.raises(ValueError):
            CisParams(**bad)
    with pytest.raises(ValueError):
        StopCriterion("bogus")
    with pytest.raises(ValueError):
        StopCriterion("max_ci_diff", 0.0)
    assert StopCriterion().threshold == 0.1
    assert StopCriterion("topk_distance").threshold == 50.0
    assert CisParams().max_iterations == 20
    with pytest.raises(ValueError):
        Query(AREA, k=0)


def blobs(seed=0):
    rng = np.random.default_rng(seed)
    centers = [(34.0, -118.0), (34.01, -118.0), (34.0, -117.99)]
    pts = []
    for lat, lon in centers:
        pts.append(np.column_stack([lat + rng.normal(0, 1e-4, 200), lon + rng.normal(0, 1e-4, 200)]))
    return centers, np.vstack(pts)


def test_kmeans_recovers_blobs():
    centers, pts = blobs()
    clusters = kmeans(pts, 3, seed=1)
    assert len(clusters) == 3
    assert sorted(c.members.size for c in clusters) == [200, 200, 200]
    for lat, lon in centers:
        d = min(math.hypot((c.center.lat - lat) * M_PER_DEG_LAT,
                           (c.center.lon - lon) * M_PER_DEG_LAT * math.cos(math.radians(lat)))
                for c in clusters)
        assert d < 5.0
    # points holds the member coordinates
    for c in clusters:
        np.testing.assert_array_equal(c.points, pts[c.members])


def test_kmeans_edge_cases():
    pts = np.array([[34.0, -118.0], [34.0, -118.0], [34.001, -118.0]])
    assert len(kmeans(pts, 10)) <= 3
    (one,) = kmeans(pts, 1)
    assert one.center.lat == pytest.approx(pts[:, 0].mean())
    with pytest.raises(ValueError):
        kmeans(np.empty((0, 2)), 2)
    assert len(kmeans([GeoPoint(1.0, 1.0)], 1)) == 1


def test_rms_radius():
    c = GeoPoint(0.0, 0.0)
    pts = np.array([[3.0 / M_PER_DEG_LAT, 0.0], [-3.0 / M_PER_DEG_LAT, 0.0],
                    [0.0, 4.0 / M_PER_DEG_LAT], [0.0, -4.0 / M_PER_DEG_LAT]])
    cl = Cluster(c, np.arange(4), pts)
    assert rms_radius(cl) == pytest.approx(math.sqrt((9 + 9 + 16 + 16) / 4), rel=1e-9)


def test_stop_satisfied():
    cell = CellRef(0, 0, GeoPoint(0.0, 0.0), 1.0)
    far = CellRef(9, 0, GeoPoint(0.0, 0.001), 1.0)
    s1, s2 = IterState(1.0, [cell]), IterState(1.05, [cell])
    maxci = StopCriterion("max_ci_diff", 0.1)
    assert not stop_satisfied(maxci, None, s1)
    assert stop_satisfied(maxci, s1, s2)
    assert not stop_satisfied(maxci, s1, IterState(1.2, [cell]))
    topk = StopCriterion("topk_distance", 50.0)
    assert stop_satisfied(topk, s1, s2)
    assert not stop_satisfied(topk, IterState(1.0, [far]), s2)  # 111 m apart
