import csv
import dataclasses
import math
from pathlib import Path

import numpy as np
import pytest

from vaporspin import cli
from vaporspin.config import RunConfig
from vaporspin.dynamics import PhysicsViolationError, fit_spin_temperature, solve_steady_state
from vaporspin.pipeline import (
    TRAJECTORY_COLUMNS,
    build_simulation,
    format_value,
    off_diagonal_mass,
    rotation_to_pump_frame,
    run_single,
    run_sweep,
    simulate,
    steady_state_row,
    trajectory_table,
    write_rates_csv,
)
import vaporspin.pipeline as pipeline

POPULATION_COLUMNS = [
    "p_f2_m2", "p_f2_m1", "p_f2_m0", "p_f2_mm1", "p_f2_mm2",
    "p_f1_m1", "p_f1_m0", "p_f1_mm1",
]


def fast_config(**overrides) -> RunConfig:
    """A cheap but fully representative run (coarse hyperfine scale)."""
    base = dict(
        a_hfs_over_gamma_se=20.0,
        t_end_over_t_se=2.0,
        stop_at_steady=False,
        sample_every=100,
    )
    base.update(overrides)
    return RunConfig(**base).validate()


def read_csv(path: Path) -> tuple[list[str], list[list[str]]]:
    with open(path, newline="") as fh:
        rows = list(csv.reader(fh))
    return rows[0], rows[1:]


class TestFormatValue:
    def test_floats_and_special_values(self):
        assert format_value(0.1) == "0.1"
        assert format_value(float("inf")) == "inf"
        assert format_value(float("-inf")) == "-inf"
        assert format_value(np.float64(2.5)) == "2.5"

    def test_booleans_including_numpy(self):
        assert format_value(True) == "true"
        assert format_value(False) == "false"
        assert format_value(np.bool_(True)) == "true"

    def test_integers_and_strings(self):
        assert format_value(7) == "7"
        assert format_value(np.int64(7)) == "7"
        assert format_value("z") == "z"


class TestRunSingle:
    def test_writes_all_outputs_with_stable_header(self, tmp_path):
        cfg = fast_config()
        summary = run_single(cfg, tmp_path)
        for name in ("rates.csv", "trajectory.csv", "summary.csv"):
            assert (tmp_path / name).exists()
        header, rows = read_csv(tmp_path / "trajectory.csv")
        assert header == TRAJECTORY_COLUMNS + POPULATION_COLUMNS
        assert len(rows) >= 10
        assert summary["ness_converged"] is True

    def test_deterministic_outputs(self, tmp_path):
        cfg = fast_config()
        run_single(cfg, tmp_path / "a")
        run_single(cfg, tmp_path / "b")
        for name in ("rates.csv", "trajectory.csv", "summary.csv"):
            assert (tmp_path / "a" / name).read_bytes() == (
                tmp_path / "b" / name
            ).read_bytes()

    def test_summary_matches_analytic_steady_state(self, tmp_path):
        cfg = fast_config()
        summary = run_single(cfg, tmp_path)
        assert summary["s_along_pump"] == pytest.approx(
            summary["s_along_pump_predicted"], rel=1e-8
        )
        assert summary["beta_fit_residual"] < 1e-6
        assert summary["off_diag_mass_pump_frame"] < 1e-12
        assert summary["efficiency"] == pytest.approx(0.792, abs=0.01)

    def test_trajectory_table_row_per_sample(self):
        cfg = fast_config(sample_every=200)
        result = simulate(cfg)
        header, rows = trajectory_table(result.traj, result.ops)
        assert len(rows) == len(result.traj)
        assert len(header) == len(rows[0])
        t_col = [r[0] for r in rows]
        assert t_col == sorted(t_col)


class TestPumpFrame:
    def test_x_pump_steady_state_is_diagonal_in_pump_frame(self, ops8, make_params):
        p = make_params(s=0.5, axis="x")
        rho, info = solve_steady_state(p, ops8)
        assert info.converged
        frame = rotation_to_pump_frame(ops8, "x")
        rho_pump = frame.conj().T @ rho @ frame
        assert off_diagonal_mass(rho_pump) < 1e-12
        assert off_diagonal_mass(rho) > 1e-3  # genuinely rotated, not diagonal

    def test_pump_frame_beta_agrees_across_axes(self, ops8, make_params):
        betas = {}
        for axis in ("x", "y", "z"):
            p = make_params(s=0.5, axis=axis)
            rho, _ = solve_steady_state(p, ops8)
            frame = rotation_to_pump_frame(ops8, axis)
            pops = np.clip(np.diag(frame.conj().T @ rho @ frame).real, 0.0, None)
            beta, resid = fit_spin_temperature(pops, ops8.labels)
            assert resid < 1e-8
            betas[axis] = beta
        assert betas["x"] == pytest.approx(betas["z"], rel=1e-9)
        assert betas["y"] == pytest.approx(betas["z"], rel=1e-9)

    def test_unknown_axis_rejected(self, ops8):
        with pytest.raises(ValueError, match="axis"):
            rotation_to_pump_frame(ops8, "w")

    def test_off_diagonal_mass_by_hand(self):
        m = np.array([[0.5, 0.3], [0.3, 0.5]], dtype=complex)
        assert off_diagonal_mass(m) == pytest.approx(0.18, rel=1e-12)
        assert off_diagonal_mass(np.diag([0.25, 0.75]).astype(complex)) == 0.0


class TestSweep:
    def test_points_match_standalone_runs(self, tmp_path):
        cfg = fast_config(sweep_variable="s_magnitude", sweep_values=(0.5, 0.25))
        path, statuses = run_sweep(cfg, tmp_path / "sweep")
        assert statuses == ["ok", "ok"]
        header, rows = read_csv(path)
        assert header[:3] == ["s_magnitude", "status", "error"]
        assert "s_magnitude" not in header[3:]  # swept key appears exactly once
        assert [r[0] for r in rows] == ["0.25", "0.5"]  # ascending order

        # point_00 must be bit-identical to a standalone run at that value
        standalone = tmp_path / "standalone"
        run_single(fast_config(s_magnitude=0.25), standalone)
        assert (tmp_path / "sweep" / "point_00" / "summary.csv").read_bytes() == (
            standalone / "summary.csv"
        ).read_bytes()

    def test_parallel_matches_serial(self, tmp_path):
        cfg = fast_config(sweep_variable="r_op_over_gamma_se", sweep_values=(0.5, 1.0))
        serial, s_statuses = run_sweep(cfg, tmp_path / "serial", jobs=1)
        parallel, p_statuses = run_sweep(cfg, tmp_path / "parallel", jobs=2)
        assert s_statuses == p_statuses == ["ok", "ok"]
        assert serial.read_bytes() == parallel.read_bytes()

    def test_failed_point_recorded_not_fatal(self, tmp_path):
        cfg = fast_config(sweep_variable="radius_cm", sweep_values=(-1.0, 1.5))
        path, statuses = run_sweep(cfg, tmp_path)
        assert statuses == ["error", "ok"]
        _, rows = read_csv(path)
        assert rows[0][1] == "error"
        assert "radius" in rows[0][2]
        assert rows[1][1] == "ok"

    def test_physics_violation_recorded(self, tmp_path, monkeypatch):
        def explode(cfg, out_dir):
            raise PhysicsViolationError("state left the physical cone", 12, 3.4e-5)

        monkeypatch.setattr(pipeline, "run_single", explode)
        cfg = fast_config(sweep_variable="s_magnitude", sweep_values=(0.5,))
        _, statuses = run_sweep(cfg, tmp_path)
        assert statuses == ["physics_violation"]

    def test_requires_sweep_variable(self, tmp_path):
        with pytest.raises(ValueError, match="sweep_variable"):
            run_sweep(fast_config(), tmp_path)


class TestCli:
    def test_rates_command(self, tmp_path, capsys):
        assert cli.main(["rates", "--out", str(tmp_path)]) == 0
        assert (tmp_path / "rates.csv").exists()
        out = capsys.readouterr().out
        assert "gamma_se_per_s" in out

    def test_run_command(self, tmp_path, capsys):
        cfg_path = tmp_path / "fast.cfg"
        cfg_path.write_text(
            "a_hfs_over_gamma_se = 20\nt_end_over_t_se = 2\n"
            "stop_at_steady = false\nsample_every = 100\n"
        )
        code = cli.main(["run", "--config", str(cfg_path), "--out", str(tmp_path / "out")])
        assert code == 0
        for name in ("rates.csv", "trajectory.csv", "summary.csv"):
            assert (tmp_path / "out" / name).exists()
        assert "s_along_pump" in capsys.readouterr().out

    def test_sweep_command(self, tmp_path, capsys):
        cfg_path = tmp_path / "sweep.cfg"
        cfg_path.write_text(
            "a_hfs_over_gamma_se = 20\nt_end_over_t_se = 2\n"
            "stop_at_steady = false\nsample_every = 100\n"
            "sweep_variable = s_magnitude\nsweep_values = 0.3, 0.6\n"
        )
        code = cli.main(["sweep", "--config", str(cfg_path), "--out", str(tmp_path / "sw")])
        assert code == 0
        assert (tmp_path / "sw" / "sweep.csv").exists()
        assert "2/2 points ok" in capsys.readouterr().out

    def test_bad_config_exits_2(self, tmp_path, capsys):
        cfg_path = tmp_path / "bad.cfg"
        cfg_path.write_text("not_a_key = 1\n")
        assert cli.main(["rates", "--config", str(cfg_path)]) == 2
        assert "config error" in capsys.readouterr().err

    def test_missing_config_exits_2(self, tmp_path):
        assert cli.main(["rates", "--config", str(tmp_path / "absent.cfg")]) == 2

    def test_sweep_without_variable_exits_2(self, tmp_path, capsys):
        assert cli.main(["sweep", "--out", str(tmp_path)]) == 2
        assert "sweep requires" in capsys.readouterr().err

    def test_physics_violation_exits_3(self, tmp_path, monkeypatch, capsys):
        def explode(cfg, out_dir):
            raise PhysicsViolationError("trace drift exceeded 1e-6", 40, 1.2e-4)

        monkeypatch.setattr(cli, "run_single", explode)
        assert cli.main(["run", "--out", str(tmp_path)]) == 3
        assert "physics violation" in capsys.readouterr().err

    def test_runtime_error_exits_4(self, tmp_path, monkeypatch, capsys):
        def explode(cfg, out_dir):
            raise RuntimeError("disk on fire")

        monkeypatch.setattr(cli, "run_single", explode)
        assert cli.main(["run", "--out", str(tmp_path)]) == 4
        assert "disk on fire" in capsys.readouterr().err

    def test_usage_errors_exit_2(self):
        with pytest.raises(SystemExit) as exc:
            cli.main([])
        assert exc.value.code == 2
        with pytest.raises(SystemExit) as exc:
            cli.main(["run", "--jobs", "0"])
        assert exc.value.code == 2


class TestRatesCsv:
    def test_single_row_with_cell_echo(self, tmp_path, default_rates):
        path = write_rates_csv(tmp_path / "rates.csv", default_rates)
        header, rows = read_csv(path)
        assert len(rows) == 1
        row = dict(zip(header, rows[0]))
        assert float(row["gamma_se_per_s"]) == pytest.approx(default_rates.gamma_se)
        assert float(row["gamma_sd_per_s"]) == pytest.approx(default_rates.gamma_sd)
        assert row["include_wall"] == "true"
        assert float(row["radius_cm"]) == 1.5

    def test_build_simulation_consistency(self):
        cfg = fast_config()
        ops, rates, params = build_simulation(cfg)
        assert params.gamma_se == rates.gamma_se
        assert params.gamma_sd == rates.gamma_sd
        assert params.a_hfs == pytest.approx(20.0 * rates.gamma_se)
        assert ops.a_hfs == params.a_hfs
        assert params.s == (0.0, 0.0, 0.5)
