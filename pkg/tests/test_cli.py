import csv
import json
import subprocess
import sys

import numpy as np
import pytest

from hodgerank import io
from hodgerank.cli import main, parse_grid
from hodgerank.experiments import ExperimentConfig, SamplerTemplate, run_ensemble
from hodgerank.graph import ComparisonRecord as R
from hodgerank.graph import build_pair_graph, write_records_csv
from hodgerank.hodge import hodge_rank, sensitivity
from hodgerank.sampling import budget_from_p0
from hodgerank.spectral import fiedler


def run(capsys, *argv):
    code = main([str(a) for a in argv])
    out, err = capsys.readouterr()
    return code, out, err


def read_rows(path):
    with open(path, newline="", encoding="utf-8") as fh:
        return list(csv.DictReader(fh))


class TestSample:
    def test_p0_budget(self, tmp_path, capsys):
        out = tmp_path / "g.csv"
        assert run(capsys, "sample", "--scheme", "without", "--n", 16, "--p0", 3,
                   "--seed", 1, "--out", out)[0] == 0
        assert len(read_rows(out)) == 63 == budget_from_p0(16, 3)
        side = json.loads(out.with_suffix(".json").read_text(encoding="utf-8"))
        assert side == {"n": 16, "m": 63, "scheme": "without_replacement", "seed": 1,
                        "transition_p0": None}

    def test_single_pair(self, tmp_path, capsys):
        out = tmp_path / "g.csv"
        run(capsys, "sample", "--scheme", "with", "--n", 2, "--m", 5, "--out", out)
        assert out.read_text(encoding="utf-8") == "i,j,weight\n0,1,5\n"

    def test_repeat_is_byte_identical(self, tmp_path, capsys):
        a, b = tmp_path / "a.csv", tmp_path / "b.csv"
        for path in (a, b):
            run(capsys, "sample", "--scheme", "greedy", "--n", 12, "--p0", 2, "--seed", 3,
                "--out", path)
        assert a.read_bytes() == b.read_bytes()
        assert a.with_suffix(".json").read_bytes() == b.with_suffix(".json").read_bytes()

    def test_seed_from_environment(self, tmp_path, capsys, monkeypatch):
        a, b = tmp_path / "a.csv", tmp_path / "b.csv"
        run(capsys, "sample", "--scheme", "without", "--n", 10, "--m", 12, "--seed", 99,
            "--out", a)
        monkeypatch.setenv("HODGE_SEED", "99")
        run(capsys, "sample", "--scheme", "without", "--n", 10, "--m", 12, "--out", b)
        assert a.read_bytes() == b.read_bytes()

    def test_needs_exactly_one_budget(self, tmp_path, capsys):
        code, _, err = run(capsys, "sample", "--scheme", "with", "--n", 4, "--out",
                           tmp_path / "g.csv")
        assert code == 2 and err.startswith("error: usage:")


class TestRankAndDecompose:
    def test_consistent_triangle(self, tmp_path, capsys):
        x = np.array([0.5, 0.0, -0.5])
        path = tmp_path / "r.csv"
        write_records_csv(path, [R(i, j, x[i] - x[j]) for i, j in [(0, 1), (1, 2), (0, 2)]])
        code, out, _ = run(capsys, "rank", "--records", path)
        assert code == 0
        np.testing.assert_allclose(json.loads(out)["scores"], x, atol=1e-12)

    def test_cyclic_triangle(self, tmp_path, capsys):
        path = tmp_path / "r.csv"
        write_records_csv(path, [R(0, 1, 1), R(1, 2, 1), R(2, 0, 1)])
        out = json.loads(run(capsys, "rank", "--records", path)[1])
        assert out["scores"] == [0.0, 0.0, 0.0]
        dec = json.loads(run(capsys, "decompose", "--records", path)[1])
        assert dec["norms"]["curl"] == pytest.approx(np.sqrt(3), rel=1e-11)

    def test_matches_library(self, tmp_path, capsys, rng):
        recs = []
        for _ in range(40):
            i, j = rng.choice(8, 2, replace=False)
            recs.append(R(int(i), int(j), float(rng.normal())))
        path = tmp_path / "r.csv"
        write_records_csv(path, recs)
        g = build_pair_graph(8, [R(r.i, r.j, float(io.fmt(r.value))) for r in recs])
        score = hodge_rank(g)
        expect = io.dumps({"scores": score.x, "lambda2": fiedler(g).fiedler_value,
                           "sensitivity": sensitivity(g),
                           "residual_norm": score.residual_norm})
        assert run(capsys, "rank", "--records", path, "--n", 8)[1] == expect

    def test_graph_input_with_means(self, tmp_path, capsys):
        g = build_pair_graph(3, [R(0, 1, 1), R(1, 2, 1), R(0, 2, 2)])
        path = tmp_path / "g.csv"
        io.write_graph(path, g, with_means=True)
        out = json.loads(run(capsys, "rank", "--graph", path)[1])
        np.testing.assert_allclose(out["scores"], hodge_rank(g).x, atol=1e-11)

    def test_disconnected(self, tmp_path, capsys):
        path = tmp_path / "r.csv"
        write_records_csv(path, [R(0, 1, 1), R(2, 3, 1)])
        code, _, err = run(capsys, "rank", "--records", path)
        assert code == 4
        assert err.startswith("error: disconnected:") and "[[0, 1], [2, 3]]" in err
        assert err.count("\n") == 1

    def test_malformed(self, tmp_path, capsys):
        path = tmp_path / "r.csv"
        path.write_text("i,j,value,annotator\n0,1,1,\n1,2,zz,\n", encoding="utf-8")
        code, _, err = run(capsys, "decompose", "--records", path)
        assert code == 3 and "line 3" in err

    def test_missing_file(self, tmp_path, capsys):
        assert run(capsys, "rank", "--records", tmp_path / "nope.csv")[0] == 3


class TestEstimate:
    def test_large_p0(self, capsys):
        out = json.loads(run(capsys, "estimate", "--p0", 200)[1])
        assert abs(out["a_theorem1"] - 0.9) <= 0.01
        assert out["a1"] == out["a2"] == out["limit"] == pytest.approx(0.9)

    def test_with_n(self, capsys):
        out = json.loads(run(capsys, "estimate", "--p0", 8, "--n", 64)[1])
        assert out["a2"] == pytest.approx(0.653539463077, abs=1e-12)

    def test_domain_error(self, capsys):
        code, _, err = run(capsys, "estimate", "--p0", 0.5)
        assert code == 5 and err.startswith("error: domain:")


class TestEnsembles:
    def test_grid_syntax(self):
        assert parse_grid("1.5,2,4") == [1.5, 2.0, 4.0]
        grid = parse_grid("1.5:16")
        assert len(grid) == 8 and grid[0] == 1.5 and grid[-1] == 16
        assert parse_grid("2:8:3") == [2.0, 4.0, 8.0]

    def test_sweep_rows(self, tmp_path, capsys):
        out = tmp_path / "s.csv"
        assert run(capsys, "sweep", "--n", 64, "--p0", "1.5:16", "--trials", 100,
                   "--seed", 7, "--out", out)[0] == 0
        rows = read_rows(out)
        assert len(rows) == 3 * 8
        assert len({(r["scheme"], r["p0"]) for r in rows}) == 24

    def test_simulate_matches_library(self, tmp_path, capsys):
        out = tmp_path / "sim.csv"
        run(capsys, "simulate", "--n", 16, "--trials", 1000, "--op", 0.1, "--out", out)
        cfg = ExperimentConfig(16, [SamplerTemplate(s) for s in
                                    ("with_replacement", "without_replacement", "greedy")],
                               [1.5, 2, 3, 4, 6], trials=1000, outlier_percentage=0.1)
        run_ensemble(cfg).write_csv(tmp_path / "lib.csv")
        assert out.read_bytes() == (tmp_path / "lib.csv").read_bytes()

    def test_simulate_config_file(self, tmp_path, capsys):
        cfg = ExperimentConfig(8, [SamplerTemplate("without")], [2.0], trials=10, base_seed=4)
        path = tmp_path / "cfg.json"
        path.write_text(json.dumps(cfg.to_dict()), encoding="utf-8")
        code, out, _ = run(capsys, "simulate", "--config", path)
        assert code == 0 and out.splitlines()[1].startswith("without_replacement,2,")

    def test_ingest(self, tmp_path, capsys):
        rng = np.random.default_rng(0)
        x = rng.random(6)
        recs = [R(i, j, float(np.sign(x[i] - x[j])), f"a{r}")
                for r in range(2) for i in range(6) for j in range(i + 1, 6)]
        path = tmp_path / "d.csv"
        write_records_csv(path, recs)
        truth, table = tmp_path / "truth.json", tmp_path / "sub.csv"
        code, _, _ = run(capsys, "ingest", "--records", path, "--out-truth", truth,
                         "--p0", "2", "--trials", 5, "--out", table)
        assert code == 0
        summary = json.loads(truth.read_text(encoding="utf-8"))
        assert summary["complete_rounds"] == 2 and summary["records"] == 30
        assert len(read_rows(table)) == 3

    def test_bad_scheme(self, capsys):
        code, _, err = run(capsys, "sweep", "--n", 8, "--schemes", "bogus")
        assert code == 2 and err.startswith("error: usage:")


def test_module_entry_point(tmp_path):
    proc = subprocess.run([sys.executable, "-m", "hodgerank", "estimate", "--p0", "4"],
                          capture_output=True, text=True, check=True)
    assert json.loads(proc.stdout)["limit"] == pytest.approx(1 - np.sqrt(0.5))
    bad = subprocess.run([sys.executable, "-m", "hodgerank", "frobnicate"],
                         capture_output=True, text=True)
    assert bad.returncode == 2 and bad.stderr.startswith("error: usage:")
