import io
import math
import os
import subprocess
import sys
from contextlib import redirect_stderr, redirect_stdout

import numpy as np
import pytest

from lyapqubit import ScenarioError, parse_scenario
from lyapqubit.cli import main

FIG1_SCENARIO = """\
# angles in units of pi
[system]
omega = 1.0
s_max = 0.1

[initial]
gamma = 0.5
phi = 1.75

[policy]
kind = standard

[simulation]
dt_free = 1e-4
sample_interval = 0.1
eps_target = 1e-9
max_switches = 2000
max_time = 100
"""


def run_cli(*argv):
    out, err = io.StringIO(), io.StringIO()
    with redirect_stdout(out), redirect_stderr(err):
        code = main(list(argv))
    return code, out.getvalue(), err.getvalue()


def write(tmp_path, name, text):
    path = tmp_path / name
    path.write_text(text)
    return str(path)


def read_csv(path):
    with open(path, "r", encoding="utf-8") as fh:
        header = fh.readline().strip().split(",")
        rows = [line.strip().split(",") for line in fh if line.strip()]
    return header, rows


class TestScenarioParsing:
    def test_valid_scenario(self, tmp_path):
        scenario = parse_scenario(write(tmp_path, "s.ini", FIG1_SCENARIO))
        assert scenario.params.omega == 1.0 and scenario.params.s_max == 0.1
        assert scenario.initial.gamma == pytest.approx(math.pi / 2)
        assert scenario.initial.phi == pytest.approx(7 * math.pi / 4)
        assert scenario.sweep is None

    def test_unknown_key_reported_with_context(self, tmp_path):
        bad = FIG1_SCENARIO + "\n[simulation]\n"  # duplicate section is a parse error
        with pytest.raises(ScenarioError):
            parse_scenario(write(tmp_path, "dup.ini", bad))
        bad2 = FIG1_SCENARIO.replace("s_max = 0.1", "s_max = 0.1\nstrength = 2")
        with pytest.raises(ScenarioError) as exc:
            parse_scenario(write(tmp_path, "bad.ini", bad2))
        assert "[system] strength" in str(exc.value)
        assert "unknown key" in str(exc.value)

    def test_multiple_diagnostics_collected(self, tmp_path):
        text = "[system]\nomega = x\n[initial]\nphi = 0.5\n"
        with pytest.raises(ScenarioError) as exc:
            parse_scenario(write(tmp_path, "multi.ini", text))
        message = str(exc.value)
        assert "[system] omega" in message
        assert "[system] s_max" in message
        assert "[initial] gamma" in message

    def test_missing_file(self):
        with pytest.raises(ScenarioError):
            parse_scenario("/nonexistent/path.ini")


class TestSimulate:
    def test_fig1_run_csv_contract(self, tmp_path):
        scenario = write(tmp_path, "fig1.ini", FIG1_SCENARIO)
        out_csv = str(tmp_path / "traj.csv")
        code, out, err = run_cli("simulate", scenario, "--output", out_csv)
        assert code == 2  # fast-switching truncation
        assert "status=truncated" in out and "regime=fsc" in out
        header, rows = read_csv(out_csv)
        assert header == ["t", "re_a", "im_a", "re_b", "im_b", "V", "dVdt", "f", "segment_kind"]
        t = np.array([float(r[0]) for r in rows])
        v = np.array([float(r[5]) for r in rows])
        f = np.array([float(r[7]) for r in rows])
        assert (np.diff(t) > 0).all()
        assert (np.diff(v) <= 1e-10).all()
        assert set(np.round(f, 12)) <= {-0.1, 0.0, 0.1}
        # V column round-trips against the amplitudes at 15 significant digits
        for r in rows[:50]:
            re_b, im_b = float(r[3]), float(r[4])
            assert re_b * re_b + im_b * im_b == pytest.approx(float(r[5]), abs=1e-12)

    def test_zero_strength_scenario(self, tmp_path):
        text = FIG1_SCENARIO.replace("s_max = 0.1", "s_max = 0.0").replace(
            "max_time = 100", "max_time = 10"
        )
        scenario = write(tmp_path, "free.ini", text)
        out_csv = str(tmp_path / "free.csv")
        code, out, _ = run_cli("simulate", scenario, "--output", out_csv)
        assert code == 2
        _, rows = read_csv(out_csv)
        f = {float(r[7]) for r in rows}
        v = [float(r[5]) for r in rows]
        assert f == {0.0}
        assert max(v) - min(v) < 1e-12

    def test_extended_scenario_converges(self, tmp_path):
        text = FIG1_SCENARIO.replace("kind = standard", "kind = extended")
        scenario = write(tmp_path, "ext.ini", text)
        out_csv = str(tmp_path / "ext.csv")
        code, out, _ = run_cli("simulate", scenario, "--output", out_csv)
        assert code == 0
        assert "status=converged" in out
        _, rows = read_csv(out_csv)
        assert rows[-1][8] == "control"
        assert 1.0 - float(rows[-1][5]) >= 1.0 - 1e-6

    def test_parse_error_exits_one(self, tmp_path):
        scenario = write(tmp_path, "bad.ini", "[system]\nomega = 1.0\n")
        code, _, err = run_cli("simulate", scenario, "--output", str(tmp_path / "x.csv"))
        assert code == 1
        assert "s_max" in err

    def test_missing_output_flag(self, tmp_path):
        scenario = write(tmp_path, "s.ini", FIG1_SCENARIO)
        code, _, err = run_cli("simulate", scenario)
        assert code == 1

    def test_deterministic_output(self, tmp_path):
        scenario = write(tmp_path, "s.ini", FIG1_SCENARIO)
        a, b = str(tmp_path / "a.csv"), str(tmp_path / "b.csv")
        run_cli("simulate", scenario, "--output", a, "--quiet")
        run_cli("simulate", scenario, "--output", b, "--quiet")
        assert open(a, "rb").read() == open(b, "rb").read()


SWEEP_SCENARIO = """\
[system]
omega = 1.0
s_max = 0.1

[sweep]
kind = ssc_fidelity
gamma_min = 0.05
gamma_max = 0.95
gamma_count = 6
phi_min = 0.0
phi_max = 2.0
phi_count = 8
s_values = 0.1, 0.05
"""


class TestSweep:
    def test_ssc_fidelity_tables(self, tmp_path):
        scenario = write(tmp_path, "sweep.ini", SWEEP_SCENARIO)
        outdir = str(tmp_path / "out")
        code, out, _ = run_cli("sweep", scenario, "--output", outdir)
        assert code == 0
        names = sorted(os.listdir(outdir))
        assert names == [
            "ssc_fidelity_s0.05.csv",
            "ssc_fidelity_s0.1.csv",
            "ssc_n_max_s0.05.csv",
            "ssc_n_max_s0.1.csv",
        ]
        header, rows = read_csv(os.path.join(outdir, "ssc_fidelity_s0.1.csv"))
        assert header == ["gamma", "phi", "fidelity"]
        assert len(rows) == 6 * 8
        fid = np.array([float(r[2]) for r in rows])
        assert (fid >= 0.9902903378454601 - 1e-9).all()

    def test_first_segment_tables(self, tmp_path):
        text = SWEEP_SCENARIO.replace("kind = ssc_fidelity", "kind = first_segment").replace(
            "s_values = 0.1, 0.05", "s_values = 0.1"
        )
        scenario = write(tmp_path, "fs.ini", text)
        outdir = str(tmp_path / "fs")
        code, _, _ = run_cli("sweep", scenario, "--output", outdir)
        assert code == 0
        assert sorted(os.listdir(outdir)) == [
            "first_segment_ratio_a.csv",
            "first_segment_ratio_b.csv",
            "first_segment_tau.csv",
        ]

    def test_phase_alignment_table(self, tmp_path):
        text = """\
[system]
omega = 1.0
s_max = 0.1

[sweep]
kind = phase_alignment
gamma_min = 0.003
gamma_max = 0.12
gamma_count = 10
"""
        scenario = write(tmp_path, "pa.ini", text)
        outdir = str(tmp_path / "pa")
        code, _, _ = run_cli("sweep", scenario, "--output", outdir)
        assert code == 0
        header, rows = read_csv(os.path.join(outdir, "phase_alignment.csv"))
        assert header == ["gamma", "phi_star", "tau_prime", "wait_time", "ratio_b", "cos2_phi_star"]
        assert all(float(r[4]) < 1e-9 for r in rows)

    def test_empty_grid_exits_one(self, tmp_path):
        text = SWEEP_SCENARIO.replace("gamma_count = 6", "gamma_count = 0")
        scenario = write(tmp_path, "empty.ini", text)
        code, _, err = run_cli("sweep", scenario, "--output", str(tmp_path / "x"))
        assert code == 1

    def test_deterministic_tables(self, tmp_path):
        scenario = write(tmp_path, "sweep.ini", SWEEP_SCENARIO)
        d1, d2 = str(tmp_path / "d1"), str(tmp_path / "d2")
        run_cli("sweep", scenario, "--output", d1, "--quiet")
        run_cli("sweep", scenario, "--output", d2, "--quiet")
        for name in os.listdir(d1):
            a = open(os.path.join(d1, name), "rb").read()
            b = open(os.path.join(d2, name), "rb").read()
            assert a == b, name


class TestDesign:
    def test_three_step_design(self):
        code, out, _ = run_cli("design", "0.5", "1.0", "3")
        assert code == 0
        assert "designed_strength=0.133974596215561" in out
        fid = float(out.split("achieved_fidelity=")[1].splitlines()[0])
        assert fid >= 1.0 - 1e-9
        assert "switch_count=3" in out

    def test_single_step_design(self):
        code, out, _ = run_cli("design", "0.5", "1.0", "1")
        assert code == 0
        assert "designed_strength=0.5" in out

    def test_invalid_step_count(self):
        code, _, err = run_cli("design", "0.5", "1.0", "0")
        assert code == 1


class TestVerify:
    def test_small_run_passes(self):
        code, out, _ = run_cli("verify", "--count", "40", "--seed", "7")
        assert code == 0
        assert "overall: pass" in out

    def test_seed_reproducibility(self):
        _, out1, _ = run_cli("verify", "--count", "25", "--seed", "123")
        _, out2, _ = run_cli("verify", "--count", "25", "--seed", "123")
        assert out1 == out2

    def test_count_validation(self):
        code, _, _ = run_cli("verify", "--count", "0")
        assert code == 1


def test_module_entry_point(tmp_path):
    scenario = tmp_path / "s.ini"
    scenario.write_text(FIG1_SCENARIO.replace("max_switches = 2000", "max_switches = 50"))
    out = subprocess.run(
        [sys.executable, "-m", "lyapqubit", "simulate", str(scenario), "--output", str(tmp_path / "o.csv")],
        capture_output=True,
        text=True,
    )
    assert out.returncode == 2
    assert "status=truncated" in out.stdout
