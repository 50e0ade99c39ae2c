import json
import os

import numpy as np
import pytest

from nsgate import cli
from nsgate.config import get_settings
from nsgate.errors import ConvergenceError
from nsgate.experiments.battery import Check, VerificationReport
from nsgate.experiments.fidelity import FidelityCurve, FidelityRow, write_curve_csv
from nsgate.storage.db import DB


def _json(capsys):
    return json.loads(capsys.readouterr().out)


def test_gate(capsys):
    assert cli.main(["--no-ledger", "gate", "--target", "pauli-x"]) == cli.EXIT_OK
    body = _json(capsys)
    assert body["target"] == "pauli-x"
    assert body["target_distance"] <= 1e-7
    assert "run_id" not in body


def test_gate_is_recorded_in_the_ledger(capsys):
    assert cli.main(["gate", "--target", "euler:0.3,1.1,2.0", "--nf-index", "2"]) == cli.EXIT_OK
    body = _json(capsys)
    ledger = DB(os.environ["NSGATE_DB_PATH"])
    try:
        [run] = ledger.recent_runs()
    finally:
        ledger.close()
    assert run["id"] == body["run_id"]
    assert run["config"] == {"target": "euler:0.3,1.1,2.0", "nf_index": 2}


def test_unknown_target_is_a_config_error():
    assert cli.main(["--no-ledger", "gate", "--target", "toffoli"]) == cli.EXIT_CONFIG


def test_slope(tmp_path, capsys):
    rows = [FidelityRow(g=float(g), nbar=0.0, f_states=(1.0 - g**2,) * 6, leakage_mean=0.0) for g in np.logspace(-3, -1, 8)]
    path = write_curve_csv(FidelityCurve(rows), tmp_path / "curve.csv")
    assert cli.main(["slope", "--in", str(path), "--window", "0.0009,0.11"]) == cli.EXIT_OK
    fit = _json(capsys)
    assert fit["slope"] == pytest.approx(2.0, abs=1e-4)
    assert fit["points"] == 8


@pytest.mark.parametrize("window", ["a,b", "0.1,0.01", "0.1"])
def test_slope_bad_window(tmp_path, window):
    path = write_curve_csv(FidelityCurve([]), tmp_path / "empty.csv")
    assert cli.main(["--no-ledger", "slope", "--in", str(path), "--window", window]) == cli.EXIT_CONFIG


def test_slope_without_enough_points(tmp_path):
    path = write_curve_csv(FidelityCurve([]), tmp_path / "empty.csv")
    assert cli.main(["--no-ledger", "slope", "--in", str(path), "--window", "0.001,0.1"]) == cli.EXIT_CONFIG


def test_sweep_writes_csv_and_ledger(tmp_path, capsys):
    config = tmp_path / "tiny.json"
    config.write_text(json.dumps({"g_values": [0.01, 0.1], "nbar_values": [0.0], "steps": 400}))
    out = tmp_path / "curve.csv"
    assert cli.main(["sweep", "--config", str(config), "--out", str(out)]) == cli.EXIT_OK
    summary = _json(capsys)
    assert summary["rows"] == 2
    assert summary["slopes"] == []
    assert len(out.read_text().splitlines()) == 3
    ledger = DB(os.environ["NSGATE_DB_PATH"])
    try:
        points = ledger.sweep_points(summary["run_id"])
    finally:
        ledger.close()
    assert [p["g"] for p in points] == [0.01, 0.1]


def test_sweep_config_errors(tmp_path, monkeypatch):
    assert cli.main(["--no-ledger", "sweep", "--config", str(tmp_path / "none.json"), "--out", "x.csv"]) == cli.EXIT_CONFIG
    config = tmp_path / "no_output.json"
    config.write_text(json.dumps({"g_values": [0.1], "nbar_values": [0.0], "steps": 400}))
    monkeypatch.setenv("NSGATE_OUTPUT_DIR", "")
    get_settings.cache_clear()
    assert cli.main(["--no-ledger", "sweep", "--config", str(config)]) == cli.EXIT_CONFIG
    assert cli.main(["--no-ledger", "sweep", "--config", str(config), "--out", "x.csv", "--workers", "0"]) == cli.EXIT_CONFIG


def test_sweep_falls_back_to_output_dir_and_worker_override(tmp_path, monkeypatch, capsys):
    config = tmp_path / "tiny.json"
    config.write_text(json.dumps({"g_values": [0.1], "nbar_values": [0.0], "steps": 400}))
    monkeypatch.setenv("NSGATE_OUTPUT_DIR", str(tmp_path / "out"))
    monkeypatch.setenv("NSGATE_WORKERS", "2")
    get_settings.cache_clear()
    assert cli.main(["sweep", "--config", str(config)]) == cli.EXIT_OK
    summary = _json(capsys)
    assert summary["out"] == str(tmp_path / "out" / "tiny.csv")
    assert (tmp_path / "out" / "tiny.csv").exists()
    ledger = DB(os.environ["NSGATE_DB_PATH"])
    try:
        run = ledger.run(summary["run_id"])
    finally:
        ledger.close()
    assert run["config"]["workers"] == 2
    assert len(run["points"]) == 1


def test_sweep_convergence_failure(tmp_path, monkeypatch):
    def fail(cfg):
        raise ConvergenceError("not converged")

    monkeypatch.setattr(cli, "gate_fidelity_experiment", fail)
    config = tmp_path / "tiny.json"
    config.write_text(json.dumps({"g_values": [0.1], "steps": 400}))
    args = ["sweep", "--config", str(config), "--out", str(tmp_path / "c.csv")]
    assert cli.main(args) == cli.EXIT_CONVERGENCE
    ledger = DB(os.environ["NSGATE_DB_PATH"])
    try:
        [run] = ledger.recent_runs()
        audits = ledger.latest("audits")
    finally:
        ledger.close()
    assert run["status"] == "error"
    assert audits[0]["action"] == "sweep.error"


def test_verify_takes_seed_from_config(tmp_path, monkeypatch, capsys):
    seen = []

    def battery(seed, steps):
        seen.append(seed)
        return VerificationReport(checks=[Check("basis_orthonormality", True, 0.0, 1e-12)])

    monkeypatch.setattr(cli, "run_verification_battery", battery)
    config = tmp_path / "seeded.json"
    config.write_text(json.dumps({"seed": 11}))
    assert cli.main(["--no-ledger", "verify", "--config", str(config)]) == cli.EXIT_OK
    assert cli.main(["--no-ledger", "verify", "--config", str(config), "--seed", "5"]) == cli.EXIT_OK
    assert cli.main(["--no-ledger", "verify"]) == cli.EXIT_OK
    assert seen == [11, 5, 20240601]
    capsys.readouterr()


def test_verify_failure_sets_exit_status(monkeypatch, capsys):
    failing = VerificationReport(checks=[Check("basis_orthonormality", False, 1e-3, 1e-12)])
    monkeypatch.setattr(cli, "run_verification_battery", lambda seed, steps: failing)
    assert cli.main(["verify"]) == cli.EXIT_VERIFICATION
    assert _json(capsys)["passed"] is False


def test_argument_errors_exit_with_two():
    with pytest.raises(SystemExit) as exc:
        cli.main(["gate"])
    assert exc.value.code == 2


@pytest.mark.slow
def test_verify(capsys):
    assert cli.main(["--no-ledger", "verify", "--steps", "400"]) == cli.EXIT_OK
    assert _json(capsys)["passed"] is True
