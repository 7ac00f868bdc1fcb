import json

import numpy as np
import pytest

import chemoflux.studies
from chemoflux.cli import main
from chemoflux.output import SERIES_COLUMNS, SUMMARY_KEYS, read_snapshot

SMALL_MASS = """
[model]
m = 1
p = 1
q = 2
chi = 0.1
xi = 1
alpha = 0.1
beta = 1
gamma = 1
delta = 1
[grid]
extent = 1.0
cells = 64
[initial]
profile = cosine
offset = 1.0
amplitude = 0.5
[control]
dt_max = 5e-3
"""


def write(tmp_path, text, name="run.ini"):
    path = tmp_path / name
    path.write_text(text)
    return str(path)


def model(text, **kw):
    for key, value in kw.items():
        lines = [f"{key} = {value}" if line.split("=")[0].strip() == key else line for line in text.splitlines()]
        text = "\n".join(lines)
    return text


class TestSimulate:
    def test_converges_and_writes_outputs(self, tmp_path, capsys):
        out = tmp_path / "out"
        assert main(["--output-dir", str(out), "simulate", write(tmp_path, SMALL_MASS)]) == 0
        header = (out / "series.csv").read_text().splitlines()[0]
        assert header.split(",") == list(SERIES_COLUMNS)
        summary = json.loads((out / "summary.json").read_text())
        assert set(SUMMARY_KEYS) <= set(summary)
        assert summary["stopping_reason"] == "converged"
        assert summary["final_linf_dev_u"] < 1e-6
        assert summary["constant_convention"] == "squared"
        assert summary["condition_report"]["theorem_applies"] is True
        snaps = sorted(out.glob("u_*.dat"))
        assert len(snaps) == 2 and (out / "u_0.txt").exists()
        assert read_snapshot(out / "u_0.dat").t == 0.0
        assert "converged" in capsys.readouterr().out

    def test_constant_profile(self, tmp_path):
        text = SMALL_MASS.replace("profile = cosine", "profile = constant")
        out = tmp_path / "out"
        assert main(["--quiet", "--output-dir", str(out), "simulate", write(tmp_path, text)]) == 0
        assert len((out / "series.csv").read_text().splitlines()) == 2
        assert json.loads((out / "summary.json").read_text())["stopping_reason"] == "converged"

    def test_output_directory_from_config(self, tmp_path):
        text = SMALL_MASS + "[output]\ndirectory = results\nsnapshot_every = 50\n"
        assert main(["--quiet", "simulate", write(tmp_path, text)]) == 0
        assert (tmp_path / "results" / "summary.json").exists()
        assert (tmp_path / "results" / "u_50.dat").exists()

    def test_t_end_reached(self, tmp_path):
        text = SMALL_MASS.replace("dt_max = 5e-3", "dt_max = 5e-3\nt_end = 0.02")
        out = tmp_path / "o"
        assert main(["--quiet", "--output-dir", str(out), "simulate", write(tmp_path, text)]) == 0
        assert json.loads((out / "summary.json").read_text())["stopping_reason"] == "t_end reached"

    def test_deterministic(self, tmp_path):
        path = write(tmp_path, SMALL_MASS.replace("p = 1\n", "p = 1.5\n"))
        a, b = tmp_path / "a", tmp_path / "b"
        assert main(["--quiet", "--output-dir", str(a), "simulate", path]) == 0
        assert main(["--quiet", "--output-dir", str(b), "simulate", path]) == 0
        assert (a / "summary.json").read_bytes() == (b / "summary.json").read_bytes()
        assert (a / "series.csv").read_bytes() == (b / "series.csv").read_bytes()

    def test_invalid_dt_bounds(self, tmp_path, capsys):
        text = SMALL_MASS.replace("dt_max = 5e-3", "dt_min = 1\ndt_max = 0.1")
        assert main(["simulate", write(tmp_path, text)]) == 1
        assert "dt_min must be <= dt_max" in capsys.readouterr().err

    def test_step_failure(self, tmp_path, capsys):
        text = model(SMALL_MASS, p="2", q="2", chi="50", alpha="1", amplitude="0.99")
        text = text.replace("dt_max = 5e-3", "dt_init = 0.5\ndt_min = 0.5\ndt_max = 0.5")
        out = tmp_path / "o"
        assert main(["--output-dir", str(out), "simulate", write(tmp_path, text)]) == 2
        assert "step failure" in capsys.readouterr().err
        assert "dump" in json.loads((out / "failure.json").read_text())


class TestCheckConditions:
    def test_holds(self, tmp_path, capsys):
        text = model(SMALL_MASS, m="2", p="2", q="3", chi="0.01", alpha="0.01")
        assert main(["check-conditions", write(tmp_path, text)]) == 0
        report = json.loads(capsys.readouterr().out)
        assert report["condi1"] and report["condi3"] and report["condi4"]

    def test_exponent_order_fails(self, tmp_path, capsys):
        text = model(SMALL_MASS, m="2", p="3", q="2")
        assert main(["check-conditions", write(tmp_path, text)]) == 3
        report = json.loads(capsys.readouterr().out)
        assert report["condi1"] is False and report["condi2"] is False

    def test_range_fails_in_2d(self, tmp_path, capsys):
        text = model(SMALL_MASS, m="1", p="3", q="4").replace("extent = 1.0", "extent = 1.0, 1.0")
        text = text.replace("cells = 64", "cells = 16")
        assert main(["check-conditions", write(tmp_path, text)]) == 3
        assert json.loads(capsys.readouterr().out)["condi3"] is False

    def test_small_mass_fails(self, tmp_path, capsys):
        text = model(SMALL_MASS, chi="10", alpha="10")
        assert main(["check-conditions", write(tmp_path, text)]) == 3
        assert json.loads(capsys.readouterr().out)["condi4"] is False


class TestEstimateConstant:
    def test_theta_zero(self, capsys):
        assert main(["estimate-constant", "--dim", "1", "--extent", "3.141592653589793",
                     "--cells", "256", "--theta", "0", "--trials", "10"]) == 0
        out = json.loads(capsys.readouterr().out)
        assert out["c_ps"] == pytest.approx(1.0)
        assert out["provenance"] == "exact_rectangle"
        assert out["lambda1_discrete"] == pytest.approx(1.0, rel=1e-4)

    def test_heuristic(self, capsys):
        assert main(["estimate-constant", "--dim", "2", "--extent", "1,2", "--cells", "16",
                     "--theta", "0.5", "--trials", "20"]) == 0
        assert json.loads(capsys.readouterr().out)["provenance"] == "heuristic_sampling"

    def test_theta_out_of_range(self, capsys):
        assert main(["estimate-constant", "--theta", "1.5"]) == 1
        assert "theta" in capsys.readouterr().err

    def test_bad_grid(self):
        assert main(["estimate-constant", "--cells", "2"]) == 1
        assert main(["estimate-constant", "--dim", "1", "--cells", "8,8"]) == 1


class TestConvergenceStudy:
    def test_passes(self, tmp_path, capsys):
        assert main(["convergence-study", write(tmp_path, SMALL_MASS), "--levels", "3"]) == 0
        out = json.loads(capsys.readouterr().out)
        assert min(out["elliptic"]["orders"]) >= 1.9
        assert min(out["time"]["orders"]) >= 0.9

    def test_levels_too_small(self, tmp_path, capsys):
        assert main(["convergence-study", write(tmp_path, SMALL_MASS), "--levels", "1"]) == 1
        assert ">= 2" in capsys.readouterr().err

    def test_below_threshold(self, tmp_path, monkeypatch):
        monkeypatch.setattr(chemoflux.studies, "TIME_MIN_ORDER", 5.0)
        assert main(["--quiet", "convergence-study", write(tmp_path, SMALL_MASS), "--levels", "2"]) == 4

    def test_step_failure(self, tmp_path):
        text = model(SMALL_MASS, p="2", q="2", chi="50", alpha="1", amplitude="0.99")
        text = text.replace("dt_max = 5e-3", "dt_init = 0.5\ndt_max = 0.5")
        assert main(["--quiet", "convergence-study", write(tmp_path, text), "--levels", "2"]) == 2

    def test_threads_env(self, tmp_path, monkeypatch, capsys):
        monkeypatch.setenv("CHEMOFLUX_THREADS", "3")
        assert main(["convergence-study", write(tmp_path, SMALL_MASS), "--levels", "2"]) == 0


class TestUsage:
    def test_help(self, capsys):
        assert main(["--help"]) == 0
        text = capsys.readouterr().out
        assert "dt_max = 1e-2" in text and "constant_convention = squared" in text

    @pytest.mark.parametrize("argv", [[], ["bogus"], ["simulate"], ["convergence-study", "x", "--levels", "two"]])
    def test_usage_errors(self, argv):
        assert main(argv) == 1

    def test_missing_config(self, tmp_path, capsys):
        assert main(["simulate", str(tmp_path / "none.ini")]) == 1
        assert "cannot read" in capsys.readouterr().err

    def test_unknown_key(self, tmp_path, capsys):
        assert main(["check-conditions", write(tmp_path, SMALL_MASS + "foo = 1\n")]) == 1
        assert "foo" in capsys.readouterr().err

    def test_module_entry(self, tmp_path):
        import subprocess
        import sys

        proc = subprocess.run([sys.executable, "-m", "chemoflux", "--quiet", "check-conditions",
                               write(tmp_path, SMALL_MASS)], capture_output=True, text=True)
        assert proc.returncode == 0
