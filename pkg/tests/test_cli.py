import csv
import io
import json
import subprocess
import sys

from raycensus.cli import main

AUDIT_ARGS = ["audit", "--c", "-2,0", "--box", "-3,3,-7,7",
              "--max-period", "2", "--window", "1", "--grid", "30"]


def run_cli(args, **kw):
    return subprocess.run([sys.executable, "-m", "raycensus.cli", *args],
                          capture_output=True, text=True, **kw)


class TestTraceRay:
    def test_real_ray_csv(self, tmp_path):
        out = tmp_path / "ray.csv"
        result = run_cli(["trace-ray", "--c", "-2,0", "--address", "0",
                          "--t", "5:200", "--samples", "40",
                          "--out", str(out)])
        assert result.returncode == 0
        rows = list(csv.reader(out.read_text().splitlines()))
        assert rows[0] == ["t", "re", "im"]
        assert len(rows) == 41
        for _, re_s, im_s in rows[1:]:
            assert abs(float(im_s)) < 1e-10  # real ray for real parameter

    def test_malformed_address_exit_2(self):
        result = run_cli(["trace-ray", "--c", "-2,0", "--address", "0,,1",
                          "--t", "5:200"])
        assert result.returncode == 2
        assert "error" in result.stderr

    def test_empty_range_exit_2(self):
        result = run_cli(["trace-ray", "--c", "-2,0", "--address", "0",
                          "--t", "200:5"])
        assert result.returncode == 2

    def test_seed_mode(self):
        result = run_cli(["trace-ray", "--c", "-2,0", "--address", "0",
                          "--t", "50:100", "--samples", "3", "--depth", "1",
                          "--mode", "seed"])
        assert result.returncode == 0
        first = result.stdout.splitlines()[1].split(",")
        assert abs(float(first[1]) - 3.9512437185814275) < 1e-12


class TestLand:
    def test_landed(self):
        result = run_cli(["land", "--c", "-2,0", "--address", "0"])
        assert result.returncode == 0
        doc = json.loads(result.stdout)
        assert doc["status"] == "landed"
        assert abs(doc["point"][0] - 1.1461932206205825) < 1e-9
        assert abs(doc["point"][1]) < 1e-12
        assert doc["config"]["c"] == [-2.0, 0.0]

    def test_c0_singular(self):
        result = run_cli(["land", "--c", "0,0", "--address", "0"])
        assert result.returncode == 4
        doc = json.loads(result.stdout)
        assert doc["status"] == "singular-hit"

    def test_preperiodic_exit_2(self):
        result = run_cli(["land", "--c", "-2,0", "--address", "3:0,1"])
        assert result.returncode == 2


class TestAudit:
    def test_satisfied_exit_0(self):
        result = run_cli(AUDIT_ARGS)
        assert result.returncode == 0
        doc = json.loads(result.stdout)
        assert doc["verdict"] == "satisfied"
        assert doc["counts"]["attracting"] == 1
        assert doc["config"]["box"] == [-3.0, 3.0, -7.0, 7.0]

    def test_window_zero_violated_exit_5(self):
        result = run_cli(["audit", "--c", "-2,0", "--box", "-3,3,-7,7",
                          "--max-period", "2", "--window", "0",
                          "--grid", "30"])
        assert result.returncode == 5
        doc = json.loads(result.stdout)
        assert doc["verdict"] == "violated"
        assert doc["counts"]["invisible_candidates"] == 3

    def test_c0_not_applicable_exit_6(self):
        result = run_cli(["audit", "--c", "0,0", "--box", "-3,3,-7,7",
                          "--max-period", "1", "--window", "1",
                          "--grid", "25", "--horizon", "10"])
        assert result.returncode == 6
        doc = json.loads(result.stdout)
        assert doc["verdict"] == "not-applicable"

    def test_csv_output(self):
        result = run_cli(AUDIT_ARGS + ["--csv"])
        assert result.returncode == 0
        rows = list(csv.reader(io.StringIO(result.stdout)))
        assert rows[0][0] == "period"
        assert any(r[7] == "0" for r in rows[1:])

    def test_byte_identical_across_threads(self):
        a = run_cli(AUDIT_ARGS + ["--threads", "1"])
        b = run_cli(AUDIT_ARGS + ["--threads", "3"])
        assert a.stdout == b.stdout
        assert a.returncode == b.returncode == 0

    def test_env_threads_fallback(self):
        import os
        env = dict(os.environ, RAYCENSUS_THREADS="2")
        a = run_cli(AUDIT_ARGS)
        b = run_cli(AUDIT_ARGS[:], env=env)
        assert a.stdout == b.stdout


class TestConfigFile:
    def test_flags_override_config(self, tmp_path):
        cfg = tmp_path / "run.cfg"
        cfg.write_text("c=-2,0\nbox=-3,3,-7,7\nmax-period=1\nwindow=1\ngrid=25\n")
        base = run_cli(["audit", "--config", str(cfg)])
        assert base.returncode == 0
        doc = json.loads(base.stdout)
        assert doc["config"]["max_period"] == 1
        over = run_cli(["audit", "--config", str(cfg), "--max-period", "2",
                        "--grid", "30"])
        doc2 = json.loads(over.stdout)
        assert doc2["config"]["max_period"] == 2

    def test_bad_config_line(self, tmp_path):
        cfg = tmp_path / "run.cfg"
        cfg.write_text("not a pair\n")
        result = run_cli(["audit", "--config", str(cfg)])
        assert result.returncode == 2


class TestOtherCommands:
    def test_cycles_json(self):
        result = run_cli(["cycles", "--c", "-2,0", "--box", "-3,3,-1,1",
                          "--max-period", "1", "--grid", "25"])
        assert result.returncode == 0
        doc = json.loads(result.stdout)
        assert len(doc["cycles"]) == 2
        classes = {c["class"] for c in doc["cycles"]}
        assert classes == {"attracting", "repelling"}

    def test_regions_json(self):
        result = run_cli(["regions", "--c", "-2,0", "--p", "1",
                          "--window", "1", "--probe-grid", "60"])
        assert result.returncode == 0
        doc = json.loads(result.stdout)
        assert len(doc["arcs"]) == 3
        assert doc["failures"] == []

    def test_regions_with_separation_audit(self):
        result = run_cli(["regions", "--c", "-2,0", "--p", "1",
                          "--window", "1", "--probe-grid", "60",
                          "--grid", "25", "--audit"])
        assert result.returncode == 0
        doc = json.loads(result.stdout)
        assert doc["separation_audit"]["violations"] == []
        assert doc["separation_audit"]["poisoned"] is False

    def test_tails_json(self):
        result = run_cli(["tails", "--c", "-2,0", "--address", "0",
                          "--max-level", "3", "--probe-grid", "60",
                          "--samples", "8"])
        assert result.returncode == 0
        doc = json.loads(result.stdout)
        assert len(doc["levels"]) == 3
        assert all(lvl["exists"] for lvl in doc["levels"])
        assert doc["r"] == 5.0

    def test_plot_bundle(self, tmp_path):
        out = tmp_path / "bundle"
        result = run_cli(["plot", "--c", "-2,0", "--p", "1", "--window", "1",
                          "--probe-grid", "40", "--out-dir", str(out)])
        assert result.returncode == 0
        names = {p.name for p in out.iterdir()}
        assert "landing_points.csv" in names
        assert "cycles.csv" in names
        assert sum(n.startswith("arc_") for n in names) == 3

    def test_missing_required_exit_2(self):
        result = run_cli(["land", "--address", "0"])
        assert result.returncode == 2


class TestInProcessMain:
    def test_main_returns_exit_code(self, capsys):
        code = main(["land", "--c", "-2,0", "--address", "0"])
        assert code == 0
        doc = json.loads(capsys.readouterr().out)
        assert doc["status"] == "landed"
