import json

import pandas as pd
import pytest
from click.testing import CliRunner

from QstLab_app import cli
from utils.spectral_functions import SOLVER_CONFIG

ML12 = "name = ml12\nchain.n_sites = 4\nchain.family = ml\nchain.m = 1\nchain.l = 2\npsi0.preset = real_packet\nsteps = 40\n"


@pytest.fixture
def lab(tmp_path):
    """Invoke the CLI with outputs and the run registry under tmp_path."""
    runner = CliRunner()
    env = {
        "QSTLAB_OUT_DIR": str(tmp_path / "out"),
        "QSTLAB_RUN_LOG": str(tmp_path / "registro_runs.csv"),
        "QSTLAB_TOL": "",
        "QSTLAB_THREADS": "1",
    }

    def _invoke(*args):
        return runner.invoke(cli, list(args), env=env)
    return _invoke


def registry(tmp_path):
    return pd.read_csv(tmp_path / "registro_runs.csv")


def test_scan_exit_ok(lab, write_config, tmp_path):
    result = lab("--config", str(write_config(ML12)), "scan")
    assert result.exit_code == 0, result.output
    assert "QST LAB" in result.output
    assert (tmp_path / "out" / "ml12.csv").exists()
    assert registry(tmp_path)["status"].tolist() == ["ok"]


def test_quiet_hides_banner(lab, write_config):
    result = lab("--quiet", "--config", str(write_config(ML12)), "scan")
    assert result.exit_code == 0
    assert "QST LAB" not in result.output


def test_certify_writes_report(lab, write_config, tmp_path):
    result = lab("--config", str(write_config(ML12)), "certify", "--pdf", str(tmp_path / "ml12.pdf"))
    assert result.exit_code == 0, result.output
    assert "certified" in result.output
    document = json.loads((tmp_path / "out" / "ml12_report.json").read_text())
    assert document["certificate"]["certified"] is True
    assert (tmp_path / "ml12.pdf").exists()


def test_configuration_error_exits_2(lab, write_config, tmp_path):
    result = lab("--config", str(write_config("chain.n_sites = 4\nchain.family = ladder\n")), "scan")
    assert result.exit_code == 2
    assert "chain.family" in result.output
    logged = registry(tmp_path)
    assert logged["status"].tolist() == ["validation_error"]
    assert "chain.family" in logged["detail"].iloc[0]


def test_missing_config_exits_2(lab):
    result = lab("certify")
    assert result.exit_code == 2
    assert "--config" in result.output


def test_solver_failure_exits_3(lab, write_config, tmp_path, monkeypatch):
    monkeypatch.setitem(SOLVER_CONFIG, "max_sweeps", 0)
    result = lab("--config", str(write_config(ML12)), "scan")
    assert result.exit_code == 3
    assert registry(tmp_path)["status"].tolist() == ["numerical_failure"]


def test_tolerance_override(lab, write_config, tmp_path):
    result = lab("--tol", "1e-30", "--config", str(write_config(ML12)), "certify")
    assert result.exit_code == 0
    assert "NOT certified" in result.output


def test_spectrum_command(lab, tmp_path):
    result = lab("spectrum", "--n-max", "8")
    assert result.exit_code == 0, result.output
    assert (tmp_path / "out" / "spectrum_sweep.csv").exists()


def test_theorem_command(lab, tmp_path):
    result = lab("theorem", "--packets", "2", "--seed", "3")
    assert result.exit_code == 0, result.output
    document = json.loads((tmp_path / "out" / "theorem.json").read_text())
    assert document["passed"] is True
    assert document["seed"] == 3


def test_repro_command(lab, tmp_path):
    result = lab("repro", "--steps", "40")
    assert result.exit_code == 0, result.output
    assert (tmp_path / "out" / "repro_report.json").exists()
    assert (tmp_path / "out" / "ml12_real.csv").exists()


def test_logs_command(lab, write_config):
    empty = lab("logs")
    assert "No hay ejecuciones registradas." in empty.output
    lab("--config", str(write_config(ML12)), "scan")
    result = lab("logs", "--limit", "5")
    assert "scan" in result.output
    assert "ok" in result.output


def test_certify_with_unresolved_levels_exits_ok(lab, write_config):
    text = "name = tiny\nchain.n_sites = 8\nchain.family = custom\nchain.couplings = " + ",".join(["3e-10"] * 7) + "\n"
    result = lab("--config", str(write_config(text)), "certify")
    assert result.exit_code == 0, result.output
    assert "NOT certified" in result.output


def test_short_grid_skips_relations(lab, write_config):
    result = lab("--config", str(write_config("name = short\nchain.n_sites = 4\nt_max = 1tau\nsteps = 400\n")), "scan")
    assert result.exit_code == 0, result.output
    assert "relations skipped" in result.output
