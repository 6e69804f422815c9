"""CLI surface: every subcommand, exact CSV round-trips, reproducibility."""

import csv
import json
import os

import pytest
from click.testing import CliRunner

from pivotlab.cli import main
from pivotlab.cube import klee_minty_orientation
from pivotlab.rationals import parse_rat
from pivotlab.reconstruct import enumerate_faces, prism, simplex
from pivotlab.ssg import random_stopping_game


@pytest.fixture
def runner():
    return CliRunner()


def _invoke(runner, args):
    result = runner.invoke(main, args, catch_exceptions=False)
    assert result.exit_code == 0, result.output
    return result


def test_lp_solve_km_sweep(runner, tmp_path):
    out = tmp_path / "km.csv"
    _invoke(runner, [
        "lp", "solve", "--instance", "km", "--d", "4", "--rule", "dantzig",
        "--seed", "3", "--trials", "2", "--out", str(out),
    ])
    rows = list(csv.DictReader(out.open()))
    assert len(rows) == 2
    for row in rows:
        assert row["pivots"] == "15"
        assert parse_rat(row["value"]) == 3**6
    summary = list(csv.DictReader((tmp_path / "km.csv.summary.csv").open()))
    assert summary[0]["mean"] == "15" and summary[0]["variance"] == "0"


def test_lp_solve_rand_all_cells_parse(runner, tmp_path):
    out = tmp_path / "r.csv"
    _invoke(runner, [
        "lp", "solve", "--instance", "rand", "--d", "3", "--n", "7",
        "--rule", "rfacet", "--seed", "5", "--trials", "4", "--out", str(out),
        "--approx",
    ])
    for row in csv.DictReader(out.open()):
        parse_rat(row["value"])
        int(row["pivots"])
        float(row["value_approx"])


def test_cube_run(runner, tmp_path):
    out = tmp_path / "cube.csv"
    r = _invoke(runner, [
        "cube", "run", "--d", "4", "--rule", "rfacet",
        "--trials", "10", "--seed", "0", "--out", str(out),
    ])
    assert "mean_steps" in r.output
    rows = list(csv.DictReader(out.open()))
    assert len(rows) == 10


def test_cube_run_from_file(runner, tmp_path):
    path = tmp_path / "o.json"
    path.write_text(klee_minty_orientation(3).to_json())
    _invoke(runner, [
        "cube", "run", "--d", "3", "--aof", "file", "--file", str(path),
        "--rule", "redge", "--trials", "5", "--seed", "1",
        "--out", str(tmp_path / "c.csv"),
    ])


def test_cube_make(runner, tmp_path):
    out = tmp_path / "km3.json"
    _invoke(runner, ["cube", "make", "--d", "3", "--kind", "km", "--out", str(out)])
    data = json.loads(out.read_text())
    assert data["d"] == 3 and sorted(data["rank"]) == list(range(8))


def test_rec_table(runner, tmp_path):
    out = tmp_path / "f.csv"
    _invoke(runner, ["rec", "table", "--kind", "f", "--dmax", "4", "--nmax", "20", "--out", str(out)])
    rows = list(csv.DictReader(out.open()))
    bykey = {(int(r["d"]), int(r["n"])): r for r in rows}
    assert int(bykey[(1, 5)]["value"]) == 1
    assert all(int(r["value"]) <= int(r["bound"]) for r in rows if r["bound"] and int(r["n"]) >= 1)


def test_haehnle_search_cmd(runner):
    r = _invoke(runner, ["haehnle", "search", "--d", "2", "--n", "2"])
    assert "max t = 3" in r.output


def test_haehnle_verify_cmd(runner, tmp_path):
    good = tmp_path / "fam.json"
    good.write_text(json.dumps({
        "d": 1, "n": 3,
        "families": [[[1, 0, 0]], [[0, 1, 0]], [[0, 0, 1]]],
    }))
    r = _invoke(runner, ["haehnle", "verify", "--file", str(good)])
    assert "valid: t = 3" in r.output
    bad = tmp_path / "bad.json"
    bad.write_text(json.dumps({
        "d": 2, "n": 2,
        "families": [[[2, 0]], [[0, 2]], [[1, 1]]],
    }))
    result = runner.invoke(main, ["haehnle", "verify", "--file", str(bad)])
    assert result.exit_code == 1 and "violation" in result.output


def test_reconstruct_cmd(runner, tmp_path):
    p = prism(3)
    g = p.graph()
    edges = "\n".join(
        f"{u} {v}" for u in range(g.n) for v in g.adjacency[u] if u < v
    )
    graph_file = tmp_path / "g.txt"
    graph_file.write_text(edges)
    poly_file = tmp_path / "p.json"
    poly_file.write_text(p.to_json())
    out = tmp_path / "lattice.json"
    r = _invoke(runner, [
        "reconstruct", "--graph", str(graph_file),
        "--oracle", str(poly_file), "--out", str(out),
    ])
    assert "F = 21" in r.output and "exact match" in r.output
    data = json.loads(out.read_text())
    assert data["F"] == enumerate_faces(p).total


def test_reconstruct_mismatch_exits_nonzero(runner, tmp_path):
    g = prism(3).graph()
    edges = "\n".join(
        f"{u} {v}" for u in range(g.n) for v in g.adjacency[u] if u < v
    )
    graph_file = tmp_path / "g.txt"
    graph_file.write_text(edges)
    poly_file = tmp_path / "p.json"
    poly_file.write_text(simplex(3).to_json())
    result = runner.invoke(main, [
        "reconstruct", "--graph", str(graph_file), "--oracle", str(poly_file),
    ])
    assert result.exit_code == 1


def test_ssg_solve_methods_agree(runner, tmp_path):
    g = random_stopping_game(8, seed=12)
    path = tmp_path / "g.json"
    path.write_text(g.to_json())
    outputs = {}
    for method in ("ludwig", "policy"):
        r = _invoke(runner, ["ssg", "solve", "--game", str(path), "--method", method, "--seed", "2"])
        outputs[method] = [l for l in r.output.splitlines() if l.startswith("value[")]
    assert outputs["ludwig"] == outputs["policy"]
    r = _invoke(runner, ["ssg", "solve", "--game", str(path), "--method", "vi", "--iters", "50"])
    assert "certified residual" in r.output


def test_experiment_run_byte_identical(runner, tmp_path):
    cfg = {
        "kind": "cube",
        "params": {"aof": "km", "d": [3, 5]},
        "rule": "rfacet",
        "trials": 6,
        "seed": 17,
        "out": str(tmp_path / "exp.csv"),
        "format": "csv",
        "jobs": 1,
        "approx": False,
    }
    cfg_file = tmp_path / "cfg.json"
    cfg_file.write_text(json.dumps(cfg))
    _invoke(runner, ["experiment", "run", "--config", str(cfg_file)])
    first = (tmp_path / "exp.csv").read_bytes()
    first_summary = (tmp_path / "exp.csv.summary.csv").read_bytes()
    _invoke(runner, ["experiment", "run", "--config", str(cfg_file)])
    assert (tmp_path / "exp.csv").read_bytes() == first
    assert (tmp_path / "exp.csv.summary.csv").read_bytes() == first_summary
    rows = list(csv.DictReader((tmp_path / "exp.csv").open()))
    assert len(rows) == 18  # d in {3, 4, 5}, six trials each


def test_experiment_jobs_env_and_flag(runner, tmp_path):
    cfg = {
        "kind": "lp",
        "params": {"instance": "cube", "d": 3},
        "rule": "bland",
        "trials": 4,
        "seed": 1,
        "out": str(tmp_path / "a.csv"),
        "format": "csv",
        "jobs": 1,
        "approx": False,
    }
    cfg_file = tmp_path / "cfg.json"
    cfg_file.write_text(json.dumps(cfg))
    _invoke(runner, ["experiment", "run", "--config", str(cfg_file)])
    serial = (tmp_path / "a.csv").read_bytes()
    os.environ["PIVOTLAB_JOBS"] = "2"
    try:
        _invoke(runner, ["experiment", "run", "--config", str(cfg_file)])
    finally:
        del os.environ["PIVOTLAB_JOBS"]
    assert (tmp_path / "a.csv").read_bytes() == serial


def test_experiment_json_format(runner, tmp_path):
    cfg = {
        "kind": "cube",
        "params": {"aof": "km", "d": 3},
        "rule": "redge",
        "trials": 3,
        "seed": 3,
        "out": str(tmp_path / "e.json"),
        "format": "json",
        "jobs": 1,
        "approx": False,
    }
    cfg_file = tmp_path / "cfg.json"
    cfg_file.write_text(json.dumps(cfg))
    _invoke(runner, ["experiment", "run", "--config", str(cfg_file)])
    rows = json.loads((tmp_path / "e.json").read_text())
    assert len(rows) == 3 and all("steps" in r for r in rows)
    summary = json.loads((tmp_path / "e.json.summary.json").read_text())
    assert summary[0]["count"] == 3
