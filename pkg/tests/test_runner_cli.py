import json

import pytest

from nlinvade.cli import main
from nlinvade.config import build_scenario, parse_config_text
from nlinvade.errors import GridTooLarge
from nlinvade.output import TIMESERIES_HEADER
from nlinvade.runner import run_scenario, sweep

BASE = """
[params]
d1 = 1.0
d2 = 1.0
k = 0.5
h_comp = 0.5
gamma = 1.0
mu = 1.0
h0 = 1.0

[kernel_u]
form = "uniform"
L0 = 1.0

[kernel_v]
form = "uniform"
L0 = 1.0

[numerics]
dx = 0.1
dt = 0.02
T = 3.0
snapshot_every = 0.25

[output]
directory = "out"
"""


def config_file(tmp_path, text=BASE, name="scenario.cfg"):
    path = tmp_path / name
    path.write_text(text)
    return path


def scenario(text=BASE):
    return build_scenario(parse_config_text(text))


class TestRunScenario:
    def test_emits_files(self, tmp_path):
        out = tmp_path / "run"
        outcome = run_scenario(scenario(), outdir=out, check_theorems=False)
        assert outcome.exit_code == 0
        assert (out / "timeseries.csv").exists()
        assert (out / "report.json").exists()
        assert (out / "profile.svg").exists()
        snaps = sorted(out.glob("snapshot_t*.txt"))
        assert len(snaps) == 2  # initial and final profiles by default

    def test_timeseries_header_exact(self, tmp_path):
        out = tmp_path / "run"
        run_scenario(scenario(), outdir=out, check_theorems=False)
        first = (out / "timeseries.csv").read_text().splitlines()[0]
        assert first == TIMESERIES_HEADER == "t,g_front,h_front,mass_u,sup_u,v_dev_L"

    def test_report_top_level_keys(self, tmp_path):
        out = tmp_path / "run"
        run_scenario(scenario(), outdir=out, check_theorems=False)
        report = json.loads((out / "report.json").read_text())
        assert {"regime", "fronts", "theta", "theorem_checks", "numerics_audit"} <= set(report)
        audit = report["numerics_audit"]
        assert "clamp_count" in audit
        assert "leakage" in audit
        assert "dt_halving_rel_front_change" in audit

    def test_byte_identical_reruns(self, tmp_path):
        out1, out2 = tmp_path / "a", tmp_path / "b"
        run_scenario(scenario(), outdir=out1, check_theorems=False)
        run_scenario(scenario(), outdir=out2, check_theorems=False)
        assert (out1 / "timeseries.csv").read_bytes() == (out2 / "timeseries.csv").read_bytes()
        assert (out1 / "report.json").read_bytes() == (out2 / "report.json").read_bytes()

    def test_undecided_fails_verify_mode(self, tmp_path):
        # Front rate lands between eps_front and 10*eps_front: undecided,
        # and verify mode must exit 4.
        text = BASE + "\n[diagnostics]\neps_front = 0.2\n"
        outcome = run_scenario(scenario(text), outdir=tmp_path / "run", check_theorems=True)
        assert outcome.report["regime"] == "undecided"
        assert outcome.exit_code == 4

    def test_dt_halving_audit(self, tmp_path):
        text = BASE + "\n[diagnostics]\ndt_halving = true\n"
        outcome = run_scenario(scenario(text), outdir=tmp_path / "run", check_theorems=False)
        rel = outcome.report["numerics_audit"]["dt_halving_rel_front_change"]
        assert rel is not None
        assert rel < 0.02


class TestSweep:
    def test_rows_follow_enumeration_order(self, tmp_path):
        text = BASE + "\n[sweep]\naxis.params.mu = [0.1, 1.0, 10.0]\n"
        header, rows = sweep(scenario(text), outdir=tmp_path / "sw", check_theorems=False)
        assert header[1] == "params.mu"
        assert [r[1] for r in rows] == [0.1, 1.0, 10.0]
        assert (tmp_path / "sw" / "sweep.csv").exists()
        assert (tmp_path / "sw" / "cell_0000" / "report.json").exists()

    def test_grid_cap(self, tmp_path):
        text = BASE + "\n[sweep]\ncap = 2\naxis.params.mu = [0.1, 1.0, 10.0]\n"
        with pytest.raises(GridTooLarge):
            sweep(scenario(text), outdir=tmp_path / "sw", check_theorems=False)

    def test_cell_error_recorded_not_fatal(self, tmp_path):
        # Second mu value drives dt over the stability bound for h_comp=2.
        text = BASE.replace("h_comp = 0.5", "h_comp = 2.0").replace("dt = 0.02", "dt = 0.019")
        text += "\n[sweep]\naxis.numerics.dt = [0.01, 0.5]\n"
        header, rows = sweep(scenario(text), outdir=tmp_path / "sw", check_theorems=False)
        assert rows[0][header.index("status")] == "ok"
        assert rows[1][header.index("status")] == "error"
        assert "stability" in rows[1][header.index("error")]

    def test_parallel_matches_serial(self, tmp_path):
        text = BASE + "\n[sweep]\naxis.params.mu = [0.5, 2.0]\n"
        _, rows1 = sweep(scenario(text), outdir=tmp_path / "s1", check_theorems=False, jobs=1)
        _, rows2 = sweep(scenario(text), outdir=tmp_path / "s2", check_theorems=False, jobs=2)
        assert rows1 == rows2

    def test_mu_dichotomy(self, tmp_path):
        # Small front response pins the invader (vanishing); a large one
        # lets it escape (spreading).
        text = """
[params]
d1 = 1.2
d2 = 1.0
k = 0.5
h_comp = 0.5
gamma = 1.0
mu = 1.0
h0 = 0.2

[kernel_u]
form = "uniform"
L0 = 1.0

[kernel_v]
form = "uniform"
L0 = 1.0

[numerics]
dx = 0.05
dt = 0.02
T = 80.0
snapshot_every = 0.5

[sweep]
axis.params.mu = [0.01, 20.0]
"""
        header, rows = sweep(scenario(text), outdir=tmp_path / "sw", check_theorems=False)
        regimes = [r[header.index("regime")] for r in rows]
        assert regimes == ["vanishing", "spreading"]


class TestCli:
    def test_validate_kernel(self, tmp_path, capsys):
        rc = main(["validate-kernel", "--config", str(config_file(tmp_path))])
        assert rc == 0
        assert "kernel_u" in capsys.readouterr().out

    def test_classify(self, tmp_path, capsys):
        rc = main(["classify", "--config", str(config_file(tmp_path))])
        assert rc == 0
        record = json.loads(capsys.readouterr().out)
        assert record["competition_case"] == "weak"
        assert record["verdict_roots"] == "theta1"

    def test_eigen_curve_file_format(self, tmp_path):
        cfg = config_file(tmp_path, BASE + "\n[eigen]\nlengths = [1.0, 2.0]\n")
        out = tmp_path / "eig"
        rc = main(["eigen-curve", "--config", str(cfg), "--out", str(out), "--quiet"])
        assert rc == 0
        lines = (out / "eigen_curve.txt").read_text().splitlines()
        assert len(lines) == 2
        l, lam = lines[0].split()
        assert float(l) == 1.0
        assert float(lam) < 0.0
        assert len(lam.replace("-", "").replace(".", "").lstrip("0")) >= 15

    def test_ode(self, tmp_path):
        cfg = config_file(tmp_path, BASE + "\n[ode]\nu0 = 0.1\nv0 = 0.1\nT = 50.0\ndt = 0.01\n")
        out = tmp_path / "ode"
        rc = main(["ode", "--config", str(cfg), "--out", str(out), "--quiet"])
        assert rc == 0
        lines = (out / "ode.csv").read_text().splitlines()
        assert lines[0] == "t,u,v"
        final = lines[-1].split(",")
        assert float(final[1]) == pytest.approx(2.0 / 3.0, abs=1e-3)

    def test_simulate_and_set_override(self, tmp_path):
        cfg = config_file(tmp_path)
        out = tmp_path / "sim"
        rc = main(
            ["simulate", "--config", str(cfg), "--out", str(out),
             "--set", "numerics.T=1.0", "--quiet"]
        )
        assert rc == 0
        assert (out / "report.json").exists()

    def test_config_error_exit_2(self, tmp_path):
        cfg = config_file(tmp_path)
        rc = main(["simulate", "--config", str(cfg), "--set", "numerics.dt=0.9", "--quiet"])
        assert rc == 2

    def test_missing_config_exit_2(self, tmp_path):
        rc = main(["simulate", "--config", str(tmp_path / "nope.cfg"), "--quiet"])
        assert rc == 2

    def test_mixed_kernel_forms_end_to_end(self, tmp_path):
        import numpy as np

        xs = np.linspace(-1.2, 1.2, 241)
        table = np.column_stack([xs, np.exp(-0.5 * (xs / 0.5) ** 2)])
        np.savetxt(tmp_path / "j1.txt", table)
        text = """
[params]
d1 = 1.0
d2 = 1.0
k = 0.5
h_comp = 0.5
gamma = 1.0
mu = 1.0
h0 = 1.0

[kernel_u]
form = "tabulated"
table = "j1.txt"

[kernel_v]
form = "triangular"
L0 = 0.8

[numerics]
dx = 0.05
dt = 0.02
T = 2.0
snapshot_every = 0.25
"""
        cfg = config_file(tmp_path, text)
        out = tmp_path / "mixed"
        rc = main(["simulate", "--config", str(cfg), "--out", str(out), "--quiet"])
        assert rc == 0
        report = json.loads((out / "report.json").read_text())
        audit = report["numerics_audit"]
        assert audit["clamp_count"] == 0
        assert abs(audit["stencil_mass_correction_u"] - 1.0) < 1e-3
        assert audit["leakage"]["front_mass_outside_left"] == 0.0

    def test_numerical_failure_exit_3(self, tmp_path):
        # A u0 table with an interior zero violates the initial support
        # condition at init time, after config validation has passed.
        table = tmp_path / "u0.txt"
        table.write_text("-1.0 0.0\n-0.5 1.0\n0.0 0.0\n0.5 1.0\n1.0 0.0\n")
        text = BASE + f'\n[initial]\nu_profile = "table"\nu_table = "{table.name}"\n'
        cfg = config_file(tmp_path, text)
        out = tmp_path / "fail"
        rc = main(["simulate", "--config", str(cfg), "--out", str(out), "--quiet"])
        assert rc == 3
        report = json.loads((out / "report.json").read_text())
        assert report["regime"] == "error"
        assert "InvalidInitialU" in report["error"]

    def test_verify_exit_4_on_undecided(self, tmp_path):
        cfg = config_file(tmp_path)
        out = tmp_path / "ver"
        rc = main(
            ["verify", "--config", str(cfg), "--out", str(out),
             "--set", "diagnostics.eps_front=0.2", "--quiet"]
        )
        assert rc == 4

    def test_sweep_cli(self, tmp_path):
        cfg = config_file(tmp_path, BASE + "\n[sweep]\naxis.params.mu = [0.5, 2.0]\n")
        out = tmp_path / "sw"
        rc = main(["sweep", "--config", str(cfg), "--out", str(out), "--quiet"])
        assert rc == 0
        lines = (out / "sweep.csv").read_text().splitlines()
        assert len(lines) == 3
