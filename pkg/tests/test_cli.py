import json
from pathlib import Path

import pytest
from click.testing import CliRunner

from honeyvol.cli import EXIT_GEOMETRY, EXIT_INPUT, EXIT_NOT_SOLVABLE, main
from honeyvol.yangmills import lattice_oracle_closed

DATA = Path(__file__).resolve().parents[1] / "data"
FIG5 = ["--alpha", "14/23,7/23,2/23", "--beta", "18/23,10/23,3/23", "--gamma", "19/23,10/23,2/23"]


@pytest.fixture
def runner():
    return CliRunner()


def run_json(runner, args):
    res = runner.invoke(main, args + ["--json"])
    assert res.exit_code == 0, res.output
    return json.loads(res.output)


def test_enumerate(runner, tmp_path):
    out = run_json(runner, ["enumerate", "--n", "3", "--d", "1", "--dump-dir", str(tmp_path)])
    assert out["count"] == 9 and len(out["maps"]) == 9
    assert all(m["m_edges"] == 2 for m in out["maps"])
    assert len(list(tmp_path.iterdir())) == 9


def test_enumerate_bad_size_is_usage_error(runner):
    res = runner.invoke(main, ["enumerate", "--n", "3", "--d", "5"])
    assert res.exit_code == 2 and "0 <= d <= n" in res.output


def test_z_exact_worked_instance(runner):
    out = run_json(runner, ["z", str(DATA / "pants_03.json"), "--method", "exact"])
    assert out["value"] == pytest.approx(0.013792111497312498, rel=1e-12)
    assert [r["value"] for r in out["graphs"] if r["value"] != 0] == ["3/23", "2/23"]


def test_z_mc_is_deterministic(runner):
    args = ["z", str(DATA / "pants_03.json"), "--method", "mc", "--samples", "20000", "--seed", "7"]
    first = run_json(runner, args)
    assert run_json(runner, args + ["--jobs", "3"]) == first
    assert abs(first["value"] - 0.013792111497312498) < 5 * first["stderr"]


def test_z_not_solvable(runner):
    res = runner.invoke(main, ["z", str(DATA / "pants_03.json"), "-b", "1/2,1/3,1/5", "-b", "1/2,1/3,1/5",
                               "-b", "1/2,1/3,1/7"])
    assert res.exit_code == EXIT_NOT_SOLVABLE


def test_z_bad_file(runner, tmp_path):
    bad = tmp_path / "bad.json"
    bad.write_text('{"g": 0, "p": 2}')
    assert runner.invoke(main, ["z", str(bad), "-b", "1/2,1/3,0", "-b", "1/2,1/3,0"]).exit_code == EXIT_INPUT


def test_ym_seven_vertex_json_round_trip(runner):
    args = ["ym", str(DATA / "seven_vertex_tree.json"), "--samples", "5000", "--seed", "2"]
    out = run_json(runner, args)
    assert len(out["factors"]) == 7
    assert {f["route"] for f in out["factors"]} == {"disc-series", "smoothed"}
    assert run_json(runner, args) == out


def test_ym_invalid_tree(runner, tmp_path):
    bad = tmp_path / "tree.json"
    bad.write_text('{"vertices": [{"id": 1}, {"id": 2}], "loops": []}')
    assert runner.invoke(main, ["ym", str(bad)]).exit_code == EXIT_INPUT


def test_render_hive_and_honeycomb(runner, tmp_path):
    hive = tmp_path / "hive.svg"
    comb = tmp_path / "comb.svg"
    assert runner.invoke(main, ["render", "--n", "3", "--d", "1", "--index", "0", "--kind", "hive"] + FIG5
                         + ["--out", str(hive)]).exit_code == 0
    assert runner.invoke(main, ["render", "--n", "3", "--d", "1"] + FIG5 + ["--out", str(comb)]).exit_code == 0
    assert hive.read_text() == (Path(__file__).parent / "data" / "worked_hive.svg").read_text()
    assert comb.read_text().startswith("<svg")


def test_render_geometry_violation(runner, tmp_path):
    heights = tmp_path / "h.json"
    heights.write_text(json.dumps([0.5] * 18))
    res = runner.invoke(main, ["render", "--n", "3", "--d", "1", "--index", "0", "--heights", str(heights),
                               "--out", str(tmp_path / "x.svg")])
    assert res.exit_code == EXIT_GEOMETRY
    assert "outside the triangle" in res.output


def test_oracle_lattice(runner):
    out = run_json(runner, ["oracle", "lattice", "--g", "1", "--T", "0.7", "--n", "2"])
    assert out["value"] == pytest.approx(lattice_oracle_closed(2, 1, 0.7), rel=1e-12)
    res = runner.invoke(main, ["oracle", "lattice", "--T", "0.5"])
    assert res.exit_code == 2


def test_oracle_orbit(runner):
    out = run_json(runner, ["oracle", "orbit", "--alpha", "0.8,0.45,0.1", "--beta", "0.7,0.4,0.15",
                            "--samples", "1000", "--bins", "5"])
    assert sum(out["counts"]) == 1000 and len(out["edges"]) == 6


def test_calibrate_stores(runner, tmp_path):
    store = tmp_path / "cal.json"
    out = run_json(runner, ["calibrate", "--samples", "20000", "--store", str(store)])
    assert json.loads(store.read_text()) == {"n=3": out["c03"]}
    assert 300 < out["c03"] < 700


def test_selftest_fast(runner):
    res = runner.invoke(main, ["selftest", "--level", "fast", "--json"])
    assert res.exit_code == 0
    out = json.loads(res.output)
    assert out["passed"] and [r["criterion"] for r in out["results"]] == [1, 2, 3, 5, 9, 10]
