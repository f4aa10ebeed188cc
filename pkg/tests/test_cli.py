"""Tests for the command-line interface."""

import numpy as np
import pytest

from eopkit.cli import main
from eopkit.data import write_snapshot
from eopkit.solver import fit_l1_regularized

from conftest import surrogate_regression_dataset


@pytest.fixture
def snapshot(tmp_path):
    ds = surrogate_regression_dataset(seed=0, n=60)
    path = tmp_path / "data.csv"
    write_snapshot(ds, path)
    return ds, path


class TestVerifyEop:
    def test_exhaustive_check_passes(self, capsys):
        code = main(["verify-eop", "--denominator", "4"])
        out = capsys.readouterr().out
        assert code == 0
        assert out.count("0 counterexamples") == 4
        assert "330 cases" in out


class TestVerifyTable:
    def test_matrix_passes(self, capsys):
        code = main(["verify-table", "--seeds", "3"])
        out = capsys.readouterr().out
        assert code == 0
        lines = [l for l in out.splitlines() if l and not l.startswith("criterion")]
        assert len(lines) == 16  # 4 criteria x 2 modes x 2 tasks
        assert all(line.endswith(",0") for line in lines)


class TestMetrics:
    def test_tabular_output(self, snapshot, capsys):
        _, path = snapshot
        code = main(["metrics", "--data", str(path), "--format", "snapshot",
                     "--lam", "0.01"])
        out = capsys.readouterr().out
        assert code == 0
        for name in ("mean_difference", "positive_residual_difference",
                     "negative_residual_difference", "accuracy_parity",
                     "min_group_average_utility"):
            assert name in out


class TestSweep:
    def test_writes_rows_and_is_deterministic(self, snapshot, tmp_path):
        ds, path = snapshot
        _, eps_min = fit_l1_regularized(ds, 0.01)
        grid = f"{1.5 * eps_min},{2.5 * eps_min}"
        out1, out2 = tmp_path / "a.csv", tmp_path / "b.csv"
        for out in (out1, out2):
            code = main(["sweep", "--data", str(path), "--format", "snapshot",
                         "--lam", "0.01", "--eps-grid", grid, "--folds", "2",
                         "--seed", "3", "--output", str(out)])
            assert code == 0
        assert out1.read_bytes() == out2.read_bytes()
        lines = out1.read_text().splitlines()
        assert lines[0].startswith("method,loss_bound,fold,status")
        assert len(lines) == 1 + 2 * 2 * 2

    def test_infeasible_only_bound_fails(self, snapshot, tmp_path):
        ds, path = snapshot
        _, eps_min = fit_l1_regularized(ds, 0.01)
        code = main(["sweep", "--data", str(path), "--format", "snapshot",
                     "--lam", "0.01", "--eps-grid", str(0.1 * eps_min),
                     "--folds", "2", "--output", str(tmp_path / "c.csv")])
        assert code == 2


class TestConfigFile:
    def test_config_supplies_values_and_flags_override(self, snapshot, tmp_path, capsys):
        ds, path = snapshot
        _, eps_min = fit_l1_regularized(ds, 0.01)
        cfg = tmp_path / "run.cfg"
        cfg.write_text(
            "# sweep configuration\n"
            f"data = {path}\n"
            "format = snapshot\n"
            "lam = 0.01\n"
            f"eps_grid = {2.0 * eps_min}\n"
            "folds = 2\n"
        )
        out = tmp_path / "rows.csv"
        code = main(["--config", str(cfg), "sweep", "--output", str(out)])
        assert code == 0
        assert len(out.read_text().splitlines()) == 1 + 4

        # a flag overrides the file's folds value
        code = main(["--config", str(cfg), "sweep", "--folds", "3",
                     "--output", str(out)])
        assert code == 0
        assert len(out.read_text().splitlines()) == 1 + 6

    def test_malformed_config_rejected(self, tmp_path):
        cfg = tmp_path / "bad.cfg"
        cfg.write_text("this line has no equals sign\n")
        with pytest.raises(SystemExit, match="expected"):
            main(["--config", str(cfg), "verify-eop"])
