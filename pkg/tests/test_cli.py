import csv
import json

import pytest

from _data import square_area
from fovpoi.cli import main

AREA = square_area(600.0)
AREA_ARG = f"{AREA.lat_min},{AREA.lon_min},{AREA.lat_max},{AREA.lon_max}"
PROFILE = f"""
area = {AREA_ARG}
n_videos = 80
frames_per_video = 4,4
hotspot = {AREA.lat_min + 0.003},{AREA.lon_min + 0.003},2
hotspot = {AREA.lat_min + 0.0015},{AREA.lon_min + 0.004},1
placement_sigma = 40
seed = 1
"""


@pytest.fixture
def data(tmp_path):
    prof = tmp_path / "p.txt"
    prof.write_text(PROFILE)
    out = tmp_path / "d.csv"
    assert main(["gen", "--profile", str(prof), "--out", str(out), "--variant", "70pct160"]) == 0
    return out


def detect(data, *extra):
    return main(["detect", "--data", str(data), "--area", AREA_ARG, "--k", "5", *extra])


def test_gen_prints_rows_and_is_repeatable(tmp_path, capsys):
    prof = tmp_path / "p.txt"
    prof.write_text(PROFILE)
    a, b = tmp_path / "a.csv", tmp_path / "b.csv"
    assert main(["gen", "--profile", str(prof), "--out", str(a), "--seed", "4"]) == 0
    assert "320" in capsys.readouterr().out
    assert main(["gen", "--profile", str(prof), "--out", str(b), "--seed", "4"]) == 0
    assert a.read_bytes() == b.read_bytes()


def test_gen_errors(tmp_path):
    prof = tmp_path / "p.txt"
    prof.write_text(PROFILE)
    with pytest.raises(SystemExit) as err:
        main(["gen", "--profile", str(prof)])
    assert err.value.code == 2
    bad = tmp_path / "bad.txt"
    bad.write_text("n_videos=3\n")
    assert main(["gen", "--profile", str(bad), "--out", str(tmp_path / "x.csv")]) == 2
    assert not (tmp_path / "x.csv").exists()
    assert main(["gen", "--profile", str(tmp_path / "missing.txt"),
                 "--out", str(tmp_path / "x.csv")]) == 1
    assert main(["gen", "--profile", str(prof), "--out", str(tmp_path / "no" / "x.csv")]) == 1


def test_naive_and_optimized_tables_identical(data, capsys):
    assert detect(data, "--algo", "naive") == 0
    naive = capsys.readouterr().out
    assert detect(data, "--algo", "optimized") == 0
    assert capsys.readouterr().out == naive
    lines = naive.splitlines()
    assert lines[0] == "rank,x,y,lat,lon,score"
    assert len(lines) == 6


def test_cis_repeatable_with_outputs(data, tmp_path, capsys):
    outs = []
    for i in range(2):
        hm, rep = tmp_path / f"h{i}.csv", tmp_path / f"r{i}.json"
        assert detect(data, "--algo", "cis", "--seed", "7", "--clusters", "3",
                      "--heatmap", str(hm), "--report", str(rep)) == 0
        outs.append((capsys.readouterr().out, hm.read_bytes()))
        report = json.loads(rep.read_text())
        assert report["report"]["detector"] == "cis"
        assert len(report["cells"]) == 5
    assert outs[0] == outs[1]


def test_pgm_heatmap_and_sample(data, tmp_path):
    hm = tmp_path / "h.pgm"
    assert detect(data, "--algo", "sample", "--fraction", "0.5", "--heatmap", str(hm)) == 0
    assert hm.read_text().startswith("P2\n")


def test_empty_area_gives_empty_table(data, capsys):
    rc = main(["detect", "--data", str(data), "--area", "10,10,10.001,10.001"])
    assert rc == 0
    assert capsys.readouterr().out.strip() == "rank,x,y,lat,lon,score"


def test_capacity_exit_code_and_no_outputs(data, tmp_path, capsys):
    rep = tmp_path / "r.json"
    rc = main(["detect", "--data", str(data), "--area", "0,0,50,50", "--report", str(rep)])
    assert rc == 3
    err = capsys.readouterr().err
    assert "250000000000" in err and "268435456" in err
    assert not rep.exists()


@pytest.mark.parametrize("flags,name", [
    (["--area", "1,2,3"], "--area"),
    (["--time", "5"], "--time"),
    (["--time", "9,1"], "--time"),
    (["--k", "0"], "--k"),
    (["--cell", "0"], "--cell"),
    (["--algo", "cis", "--fc", "1.5"], "--fc"),
    (["--algo", "cis", "--threshold", "-1"], "--threshold"),
    (["--algo", "sample", "--fraction", "0"], "--fraction"),
    (["--heatmap", "out.png"], "--heatmap"),
])
def test_validation_errors_name_the_flag(data, tmp_path, capsys, flags, name):
    rep = tmp_path / "r.json"
    args = ["detect", "--data", str(data), "--area", AREA_ARG, "--report", str(rep), *flags]
    assert main(args) == 2
    assert name in capsys.readouterr().err
    assert not rep.exists()


def test_bad_dataset(tmp_path, capsys):
    bad = tmp_path / "bad.csv"
    bad.write_text("video_id,t,lat,lon,theta,r,alpha\nv,1,34,-118,400,10,60\n")
    assert main(["detect", "--data", str(bad), "--area", AREA_ARG]) == 2
    assert "theta" in capsys.readouterr().err
    assert main(["detect", "--data", str(tmp_path / "none.csv"), "--area", AREA_ARG]) == 1


def bench(data, tmp_path, suite_text, *extra):
    suite = tmp_path / "suite.txt"
    suite.write_text(suite_text)
    out = tmp_path / "res.csv"
    rc = main(["bench", "--data", str(data), "--area", AREA_ARG, "--suite", str(suite),
               "--out", str(out), *extra])
    return rc, out


def test_bench_speedup_and_rows(data, tmp_path, capsys):
    rc, out = bench(data, tmp_path, "naive naive\nopt optimized\ncis cis c=3\n", "--repeats", "3")
    assert rc == 0
    rows = list(csv.DictReader(out.open()))
    assert sum(r["detector"] == "cis" for r in rows) == 3
    assert all(float(r["sum_min_dist_m"]) == 0.0 for r in rows if r["detector"] == "opt")
    summary = capsys.readouterr().out
    opt_line = next(line for line in summary.splitlines() if line.startswith("opt"))
    assert float(opt_line.split()[2].rstrip("x")) > 1.0


def test_bench_reference_failure_writes_nothing(data, tmp_path):
    rc, out = bench(data, tmp_path, "bad sample fraction=3\nopt optimized\n")
    assert rc != 0
    assert not out.exists()


def test_bench_bad_suite(data, tmp_path, capsys):
    rc, out = bench(data, tmp_path, "x nonsense\n")
    assert rc == 2 and "--suite" in capsys.readouterr().err
    assert not out.exists()
