import json
import subprocess
import sys

import numpy as np
import pytest

from givp.cli import main
from givp.stats import CSV_COLUMNS, read_table


def run(*argv):
    return main([str(a) for a in argv])


@pytest.fixture
def tri_file(data_dir):
    return data_dir / "triangle.json"


@pytest.fixture
def solved(tmp_path, tri_file):
    out = tmp_path / "sol.json"
    assert run("solve", tri_file, "--variant", "sequential", "--out", out) == 0
    return out


def test_gen_twice_identical(tmp_path, capsys):
    for k in range(2):
        assert run("gen", "--seed", 7, "--points", 50, "--edge-attempts", 70, "--out", tmp_path / f"g{k}.json") == 0
    assert (tmp_path / "g0.json").read_bytes() == (tmp_path / "g1.json").read_bytes()
    doc = json.loads((tmp_path / "g0.json").read_text())
    assert doc["gen"]["seed"] == 7 and doc["gen"]["rng_id"]
    assert "vertices=" in capsys.readouterr().out


def test_gen_missing_seed_shows_usage(tmp_path, capsys):
    with pytest.raises(SystemExit) as exc:
        run("gen", "--out", tmp_path / "g.json")
    assert exc.value.code != 0
    assert "usage:" in capsys.readouterr().err


def test_gen_one_point_rejected(tmp_path, capsys):
    assert run("gen", "--seed", 1, "--points", 1, "--out", tmp_path / "g.json") == 2
    err = capsys.readouterr().err
    assert err.startswith("error: ") and err.count("\n") == 1


def test_solve_prints_counts(solved, capsys):
    doc = json.loads(solved.read_text())
    assert len(doc["sites"]) == 12


def test_solve_bad_variant(tmp_path, tri_file, capsys):
    assert run("solve", tri_file, "--variant", "bogus", "--out", tmp_path / "s.json") == 2
    assert "{naive, sequential, recursive}" in capsys.readouterr().err


def test_solve_bad_safety(tmp_path, tri_file, capsys):
    assert run("solve", tri_file, "--safety", 1.5, "--out", tmp_path / "s.json") == 2
    assert "safety" in capsys.readouterr().err


def test_solve_invalid_pslg(tmp_path, capsys):
    bad = tmp_path / "bad.json"
    bad.write_text(json.dumps({"vertices": [[0, 0], [1, 1], [0, 1], [1, 0]], "edges": [[0, 1], [2, 3]]}))
    assert run("solve", bad, "--out", tmp_path / "s.json") == 2


def test_verify_all_modes(tmp_path, tri_file, solved, capsys):
    report = tmp_path / "r.json"
    assert run("verify", tri_file, solved, "--mode", "all", "--report", report) == 0
    out = capsys.readouterr().out
    for check in ("certificate: PASS", "sampled: PASS", "bruteforce: PASS"):
        assert check in out
    doc = json.loads(report.read_text())
    assert doc["status"] == "PASS" and len(doc["checks"]) == 3


def test_verify_tampered_site(tmp_path, tri_file, solved, capsys):
    doc = json.loads(solved.read_text())
    eps = doc["report"]["epsilon"]
    doc["sites"][0][0] += 10 * eps
    bad = tmp_path / "bad.json"
    bad.write_text(json.dumps(doc))
    for mode in ("certificate", "bruteforce", "sampled"):
        assert run("verify", tri_file, bad, "--mode", mode) == 1
    assert "FAIL" in capsys.readouterr().out


def test_verify_solution_for_other_graph(tmp_path, solved, capsys):
    g = tmp_path / "g.json"
    run("gen", "--seed", 1, "--points", 6, "--edge-attempts", 8, "--out", g)
    assert run("verify", g, solved) == 2


def test_bruteforce_refuses_over_cap(tmp_path, capsys):
    g = tmp_path / "g.json"
    s = tmp_path / "s.json"
    run("gen", "--seed", 101, "--points", 8, "--edge-attempts", 12, "--out", g)
    run("solve", g, "--variant", "naive", "--out", s)
    assert len(json.loads(s.read_text())["sites"]) > 5000
    capsys.readouterr()
    assert run("verify", g, s, "--mode", "bruteforce") == 2
    assert "--mode certificate" in capsys.readouterr().err
    assert run("verify", g, s, "--mode", "all") == 0
    assert "bruteforce: skipped" in capsys.readouterr().out


def test_render_matches_golden(tmp_path, tri_file, solved, golden_dir):
    out = tmp_path / "t.svg"
    assert run("render", tri_file, "--solution", solved, "--out", out) == 0
    assert out.read_bytes() == (golden_dir / "triangle_sequential.svg").read_bytes()


def test_render_pslg_only(tmp_path, tri_file):
    out = tmp_path / "t.svg"
    run("render", tri_file, "--out", out)
    text = out.read_text()
    assert text.count("<g ") == 1 and 'id="edges"' in text


def test_render_empty_solution_same_as_pslg_only(tmp_path, tri_file, solved):
    doc = json.loads(solved.read_text())
    doc["sites"] = []
    empty = tmp_path / "empty.json"
    empty.write_text(json.dumps(doc))
    run("render", tri_file, "--out", tmp_path / "a.svg")
    run("render", tri_file, "--solution", empty, "--diagram", "--out", tmp_path / "b.svg")
    assert (tmp_path / "a.svg").read_bytes() == (tmp_path / "b.svg").read_bytes()


def test_render_with_diagram(tmp_path, tri_file, solved):
    out = tmp_path / "t.svg"
    run("render", tri_file, "--solution", solved, "--diagram", "--out", out)
    text = out.read_text()
    order = [text.index(f'id="{layer}"') for layer in ("voronoi", "edges", "initial-circles", "inner-circles", "sites")]
    assert order == sorted(order)


SMALL = ("--points", 6, 9, "--attempts", 9, 14)


def test_experiment_outputs_and_determinism(tmp_path, capsys):
    for k in range(2):
        d = tmp_path / str(k)
        d.mkdir()
        assert run("experiment", "--runs", 4, "--seed", 3, *SMALL, "--csv", d / "e.csv") == 0
    for name in ("e.csv", "e_analysis.json", "e_histograms.png", "e_sites_vs_edges.png"):
        assert (tmp_path / "0" / name).read_bytes() == (tmp_path / "1" / name).read_bytes(), name
    lines = (tmp_path / "0" / "e.csv").read_text().splitlines()
    assert lines[0] == ",".join(CSV_COLUMNS)
    assert len(lines) == 1 + 4 + 3
    table = read_table(tmp_path / "0" / "e.csv")
    assert list(table["run"]) == [1, 2, 3, 4]
    assert np.all(table["regions"] > 0)
    analysis = json.loads((tmp_path / "0" / "e_analysis.json").read_text())
    assert set(analysis["correlations"]) == {"alpha_vs_edges", "epsilon_vs_edges", "alpha_vs_epsilon"}
    assert sum(analysis["histograms"]["alpha_deg"]["counts"]) == 4


def test_experiment_parallel_matches_serial(tmp_path):
    run("experiment", "--runs", 3, "--seed", 5, *SMALL, "--csv", tmp_path / "a.csv")
    run("experiment", "--runs", 3, "--seed", 5, *SMALL, "--jobs", 2, "--csv", tmp_path / "b.csv")
    assert (tmp_path / "a.csv").read_bytes() == (tmp_path / "b.csv").read_bytes()


def test_experiment_zero_runs(tmp_path, capsys):
    with pytest.raises(SystemExit) as exc:
        run("experiment", "--runs", 0, "--seed", 1, "--csv", tmp_path / "e.csv")
    assert exc.value.code != 0
    assert "positive" in capsys.readouterr().err


def test_module_entry_point(tmp_path):
    res = subprocess.run([sys.executable, "-m", "givp", "gen", "--seed", "2", "--points", "5", "--edge-attempts", "6",
                          "--out", str(tmp_path / "g.json")], capture_output=True, text=True)
    assert res.returncode == 0, res.stderr
