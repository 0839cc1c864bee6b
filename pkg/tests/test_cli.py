"""Command line behavior: exit codes, outputs, precedence, determinism."""

import json
import math
import os
import subprocess
import sys

import numpy as np
import pytest

import ringqpe as rq
from ringqpe.cli import main

from conftest import SIGMA_X, write_problem

TWO_PI = 2.0 * np.pi


@pytest.fixture
def sigma_x_file(tmp_path, sigma_x_problem):
    return write_problem(tmp_path, sigma_x_problem, "sigma_x.json")


@pytest.fixture
def sigma_z_file(tmp_path, sigma_z_problem):
    return write_problem(tmp_path, sigma_z_problem, "sigma_z.json")


def read_summary_value(out_dir, label):
    text = (out_dir / "summary.txt").read_text()
    for line in text.splitlines():
        if line.startswith(label):
            return float(line.split("=")[-1])
    raise AssertionError(f"no {label!r} line in summary:\n{text}")


class TestParsing:
    def test_help_exits_zero(self, capsys):
        assert main(["--help"]) == 0
        assert "ring-sim" in capsys.readouterr().out

    def test_subcommand_help(self, capsys):
        assert main(["compare", "--help"]) == 0
        out = capsys.readouterr().out
        assert "--t-bits" in out

    def test_no_arguments_is_usage_error(self, capsys):
        assert main([]) == 1
        assert "error" in capsys.readouterr().err

    def test_unknown_flag_is_usage_error(self, capsys):
        assert main(["ring-sim", "--bogus"]) == 1
        assert "--bogus" in capsys.readouterr().err

    def test_module_entry_point(self):
        proc = subprocess.run(
            [sys.executable, "-m", "ringqpe", "--help"],
            capture_output=True, text=True,
        )
        assert proc.returncode == 0
        assert "ring-sim" in proc.stdout


class TestProblemIo:
    def test_missing_problem_flag(self, tmp_path, capsys):
        assert main(["ring-sim", "--out-dir", str(tmp_path)]) == 1
        assert "--problem" in capsys.readouterr().err

    def test_nonexistent_problem_file(self, tmp_path, capsys):
        missing = tmp_path / "nope.json"
        code = main(["ring-sim", "--problem", str(missing),
                     "--out-dir", str(tmp_path)])
        assert code == 2
        assert "nope.json" in capsys.readouterr().err

    def test_corrupt_problem_file(self, tmp_path, capsys):
        bad = tmp_path / "bad.json"
        bad.write_text("{definitely not json")
        code = main(["qpe", "--problem", str(bad), "--out-dir", str(tmp_path)])
        assert code == 2
        assert "bad.json" in capsys.readouterr().err

    def test_semantically_invalid_problem(self, tmp_path, capsys):
        bad = tmp_path / "skew.json"
        bad.write_text(json.dumps({
            "hamiltonian": rq.matrix_to_json(np.array([[0.0, 1.0], [0.0, 0.0]])),
            "E_R": 1.0,
            "state": {"re": [1.0, 0.0], "im": [0.0, 0.0]},
        }))
        assert main(["ring-sim", "--problem", str(bad),
                     "--out-dir", str(tmp_path)]) == 2


class TestRingSim:
    def test_ground_state_read_out(self, tmp_path, sigma_x_file, capsys):
        out = tmp_path / "out"
        code = main(["ring-sim", "--problem", str(sigma_x_file),
                     "--out-dir", str(out)])
        assert code == 0
        stdout = capsys.readouterr().out
        assert "dominant eigenphase (signed)" in stdout

        signed = read_summary_value(out, "dominant eigenphase (signed)")
        assert abs(signed - (-2.0)) < TWO_PI / 101
        energy = read_summary_value(out, "energy = E_R * phase")
        assert abs(energy - (-2.0)) < TWO_PI / 101

        for i in range(3):
            assert (out / f"density_{i:02d}.csv").exists()
        peaks = json.loads((out / "peaks.json").read_text())
        assert len(peaks["peaks"]) >= 1
        assert peaks["peaks"][0]["weight"] > 0.9

    def test_density_snapshots_are_normalized(self, tmp_path, sigma_x_file):
        out = tmp_path / "out"
        assert main(["ring-sim", "--problem", str(sigma_x_file),
                     "--out-dir", str(out)]) == 0
        from ringqpe.ring import read_density_csv
        density = read_density_csv(out / "density_00.csv")
        integral = density.density.sum() * TWO_PI / density.grid_size_N
        assert abs(integral - 1.0) < 1e-8

    def test_zero_hamiltonian_reads_out_zero_energy(self, tmp_path):
        problem = rq.EnergyProblem(
            np.zeros((2, 2)), 1.0, np.array([1.0, 0.0])
        )
        path = write_problem(tmp_path, problem, "zero.json")
        out = tmp_path / "out"
        assert main(["ring-sim", "--problem", str(path),
                     "--out-dir", str(out)]) == 0
        signed = read_summary_value(out, "dominant eigenphase (signed)")
        assert abs(signed) < TWO_PI / 512
        energy = read_summary_value(out, "energy = E_R * phase")
        assert abs(energy) < TWO_PI / 512

    def test_unitary_problem_has_no_energy_line(self, tmp_path, capsys):
        u = np.diag(np.exp(1j * np.array([np.pi / 2, -np.pi / 2])))
        spec = rq.UnitarySpec(u, np.array([1.0, 0.0]))
        path = write_problem(tmp_path, spec, "diag.json")
        out = tmp_path / "out"
        assert main(["ring-sim", "--problem", str(path),
                     "--out-dir", str(out)]) == 0
        summary = (out / "summary.txt").read_text()
        assert "dominant eigenphase" in summary
        assert "energy" not in summary
        signed = read_summary_value(out, "dominant eigenphase (signed)")
        assert abs(signed - np.pi / 2) < TWO_PI / 101

    def test_grid_too_coarse_for_cutoff(self, tmp_path, sigma_x_file, capsys):
        code = main(["ring-sim", "--problem", str(sigma_x_file),
                     "--out-dir", str(tmp_path), "-l", "50", "-N", "64"])
        assert code == 1
        assert "N >= 2l+1" in capsys.readouterr().err


class TestQpe:
    def test_exact_estimate(self, tmp_path, sigma_x_file):
        out = tmp_path / "out"
        code = main(["qpe", "--problem", str(sigma_x_file),
                     "--out-dir", str(out), "--t-bits", "10"])
        assert code == 0
        est = json.loads((out / "qpe_estimate.json").read_text())
        assert est["t"] == 10
        assert est["mode"] == "exact"
        assert est["k"] == round(1024 * (TWO_PI - 2.0) / TWO_PI)
        assert rq.circular_distance(est["phi"], TWO_PI - 2.0) <= TWO_PI / 1024

        with open(out / "qpe_distribution.csv") as fh:
            header = fh.readline().strip()
            rows = fh.read().splitlines()
        assert header == "k,probability"
        assert len(rows) == 1024

    def test_representable_phase_is_exact(self, tmp_path):
        u = np.diag(np.exp(1j * np.array([np.pi / 2, -np.pi / 2])))
        spec = rq.UnitarySpec(u, np.array([1.0, 0.0]))
        path = write_problem(tmp_path, spec, "diag.json")
        out = tmp_path / "out"
        assert main(["qpe", "--problem", str(path), "--out-dir", str(out),
                     "--t-bits", "10"]) == 0
        est = json.loads((out / "qpe_estimate.json").read_text())
        assert est["k"] == 256  # pi/2 = 2 pi * 256 / 1024 exactly

    def test_sampled_runs_are_reproducible(self, tmp_path, sigma_x_file):
        out_a, out_b = tmp_path / "a", tmp_path / "b"
        args = ["qpe", "--problem", str(sigma_x_file), "--t-bits", "8",
                "--shots", "1000", "--seed", "21"]
        assert main(args + ["--out-dir", str(out_a)]) == 0
        assert main(args + ["--out-dir", str(out_b)]) == 0
        assert (out_a / "qpe_distribution.csv").read_bytes() \
            == (out_b / "qpe_distribution.csv").read_bytes()
        est = json.loads((out_a / "qpe_estimate.json").read_text())
        assert est["mode"] == "sampled"
        assert est["seed"] == 21


class TestCompare:
    def test_eigenstate_routes_agree(self, tmp_path, sigma_x_file, capsys):
        out = tmp_path / "out"
        code = main(["compare", "--problem", str(sigma_x_file),
                     "--out-dir", str(out)])
        assert code == 0
        report = json.loads((out / "compare.json").read_text())
        assert report["ok"] is True
        assert report["ambiguous"] is False
        assert max(report["distances"].values()) <= report["bound"]
        assert abs(report["phi_eig"] - (TWO_PI - 2.0)) < 1e-9
        stdout = capsys.readouterr().out
        assert "phi_ring" in stdout and "bound" in stdout

    def test_superposition_is_ambiguous(self, tmp_path, sigma_z_file, capsys):
        out = tmp_path / "out"
        code = main(["compare", "--problem", str(sigma_z_file),
                     "--out-dir", str(out)])
        assert code == 4
        report = json.loads((out / "compare.json").read_text())
        assert report["ambiguous"] is True
        assert report["secondary_weight"] >= 0.1
        assert "ambiguous" in capsys.readouterr().err

    def test_weak_contamination_trips_mismatch(self, tmp_path, capsys):
        # 6 percent of a second eigencolor stays under the ambiguity
        # threshold but drags the Rayleigh phase past the bound
        h = np.diag([1.0, -2.78])
        state = np.array([math.sqrt(0.94), math.sqrt(0.06)])
        problem = rq.EnergyProblem(h, 1.0, state)
        path = write_problem(tmp_path, problem, "mixed.json")
        out = tmp_path / "out"
        code = main(["compare", "--problem", str(path), "--out-dir", str(out)])
        assert code == 3
        report = json.loads((out / "compare.json").read_text())
        assert report["ambiguous"] is False
        assert report["secondary_weight"] < 0.1
        assert report["ok"] is False
        assert report["distances"]["ring_eig"] > report["bound"]
        assert "disagree" in capsys.readouterr().err

    def test_register_coarser_than_grid_rejected(self, tmp_path, sigma_x_file, capsys):
        code = main(["compare", "--problem", str(sigma_x_file),
                     "--out-dir", str(tmp_path), "-l", "10", "-N", "32",
                     "--t-bits", "6"])
        assert code == 1
        assert "N >= 2^t" in capsys.readouterr().err


class TestFigure:
    def test_slice_table_and_snapshots(self, tmp_path, sigma_x_file):
        out = tmp_path / "out"
        code = main(["figure", "--problem", str(sigma_x_file),
                     "--out-dir", str(out), "--t-bits", "3"])
        assert code == 0

        with open(out / "slice_table.csv") as fh:
            header = fh.readline().strip()
            rows = [line.split(",") for line in fh.read().splitlines()]
        assert header == "k,phi_lo,phi_hi"
        assert len(rows) == 8
        k4 = rows[4]
        assert int(k4[0]) == 4
        assert abs(float(k4[1]) - np.pi) < 1e-12
        assert abs(float(k4[2]) - 5.0 * np.pi / 4.0) < 1e-12

        from ringqpe.ring import read_density_csv
        argmaxes = []
        for i in range(3):
            density = read_density_csv(out / f"fig_density_{i:02d}.csv")
            j = int(np.argmax(density.density))
            argmaxes.append(density.phi_grid[j])
        # packet drifts from the origin to the full-revival peak
        assert abs(argmaxes[0] - 0.0) < 1e-12
        assert abs(argmaxes[1] - (np.pi - 1.0)) < 3 * TWO_PI / 512
        assert abs(argmaxes[2] - (TWO_PI - 2.0)) < 3 * TWO_PI / 512
        assert argmaxes[0] < argmaxes[1] < argmaxes[2]


class TestBench:
    def test_small_suite_writes_outputs(self, tmp_path, capsys):
        out = tmp_path / "out"
        code = main(["bench", "--out-dir", str(out), "--sizes", "24,48",
                     "--repeats", "3"])
        assert code == 0
        assert (out / "bench.csv").exists()
        with open(out / "bench.csv") as fh:
            lines = fh.read().splitlines()
        assert lines[0] == "method,size,median_s,spread,op_count,seed"
        assert len(lines) == 1 + 6  # three methods, two sizes each
        fits = json.loads((out / "bench_fits.json").read_text())
        assert fits == []  # two points per method cannot support a fit
        assert "wrote" in capsys.readouterr().out

    def test_bench_rejects_bad_sizes(self, tmp_path, capsys):
        code = main(["bench", "--out-dir", str(tmp_path), "--sizes", "0,24",
                     "--repeats", "3"])
        assert code == 1


class TestConfigPrecedence:
    def test_flag_beats_config_beats_default(self, tmp_path, sigma_x_file):
        config = tmp_path / "config.json"
        config.write_text(json.dumps({"mode_cutoff_l": 10}))

        out_config = tmp_path / "via_config"
        assert main(["ring-sim", "--problem", str(sigma_x_file),
                     "--config", str(config), "--out-dir", str(out_config)]) == 0
        summary = (out_config / "summary.txt").read_text()
        assert "mode cutoff l = 10" in summary

        out_flag = tmp_path / "via_flag"
        assert main(["ring-sim", "--problem", str(sigma_x_file),
                     "--config", str(config), "--out-dir", str(out_flag),
                     "-l", "12"]) == 0
        summary = (out_flag / "summary.txt").read_text()
        assert "mode cutoff l = 12" in summary

    def test_config_can_name_the_problem(self, tmp_path, sigma_x_file):
        config = tmp_path / "config.json"
        config.write_text(json.dumps({"problem": str(sigma_x_file)}))
        out = tmp_path / "out"
        assert main(["qpe", "--config", str(config), "--out-dir", str(out)]) == 0
        assert (out / "qpe_estimate.json").exists()

    def test_unknown_config_key_rejected(self, tmp_path, sigma_x_file, capsys):
        config = tmp_path / "config.json"
        config.write_text(json.dumps({"mode_cutoff": 10}))
        code = main(["ring-sim", "--problem", str(sigma_x_file),
                     "--config", str(config), "--out-dir", str(tmp_path)])
        assert code == 1
        assert "mode_cutoff" in capsys.readouterr().err

    def test_corrupt_config_is_io_error(self, tmp_path, sigma_x_file):
        config = tmp_path / "config.json"
        config.write_text("{broken")
        code = main(["ring-sim", "--problem", str(sigma_x_file),
                     "--config", str(config), "--out-dir", str(tmp_path)])
        assert code == 2

    def test_out_dir_env_fallback(self, tmp_path, sigma_x_file, monkeypatch):
        env_dir = tmp_path / "from_env"
        monkeypatch.setenv("RINGQPE_OUT_DIR", str(env_dir))
        assert main(["qpe", "--problem", str(sigma_x_file),
                     "--t-bits", "6"]) == 0
        assert (env_dir / "qpe_estimate.json").exists()

    def test_out_dir_flag_beats_env(self, tmp_path, sigma_x_file, monkeypatch):
        env_dir = tmp_path / "from_env"
        flag_dir = tmp_path / "from_flag"
        monkeypatch.setenv("RINGQPE_OUT_DIR", str(env_dir))
        assert main(["qpe", "--problem", str(sigma_x_file),
                     "--t-bits", "6", "--out-dir", str(flag_dir)]) == 0
        assert (flag_dir / "qpe_estimate.json").exists()
        assert not env_dir.exists()


class TestDeterminism:
    def test_ring_sim_reruns_byte_identical(self, tmp_path, sigma_x_file):
        out_a, out_b = tmp_path / "a", tmp_path / "b"
        for out in (out_a, out_b):
            assert main(["ring-sim", "--problem", str(sigma_x_file),
                         "--out-dir", str(out)]) == 0
        for name in ["density_00.csv", "density_01.csv", "density_02.csv",
                     "peaks.json", "summary.txt"]:
            a = (out_a / name).read_bytes()
            b = (out_b / name).read_bytes()
            assert a == b, f"{name} differs between identical runs"
