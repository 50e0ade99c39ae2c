import dataclasses
from pathlib import Path

import numpy as np
import pytest

from nsgate.config import ExperimentConfig, load_experiment_config
from nsgate.errors import ConfigError, InsufficientDataError
from nsgate.experiments.fidelity import (
    CSV_COLUMNS,
    FidelityCurve,
    FidelityExperiment,
    FidelityRow,
    axial_input_states,
    fit_small_g_slope,
    gate_fidelity_experiment,
    read_curve_csv,
    write_curve_csv,
)

CONFIG_DIR = Path(__file__).resolve().parent.parent / "config"

# Six axial states, NF spectator 1, H₀ = λ₄, Γ = γ = 0.1Ω, square π pulse.
PINNED_F_MEAN = {
    (0.0, 10**-2.5): 0.99998741220675,
    (0.0, 0.01): 0.99987841948420,
    (0.0, 10**-1.5): 0.99891092748329,
    (0.0, 0.1): 0.99230124165539,
    (0.0, 0.3): 0.97352990681073,
    (0.0, 1.0): 0.98164394891695,
    (1.0, 10**-2.5): 0.99997916234480,
    (1.0, 0.01): 0.99979846875945,
    (1.0, 10**-1.5): 0.99818813866120,
    (1.0, 0.1): 0.98709933206255,
    (1.0, 0.3): 0.95545335291366,
    (1.0, 1.0): 0.96892072865993,
}
PINNED_F_STATES = (0.97155251, 0.97660699, 0.97354303, 0.97299750, 0.96916909, 0.97731032)


@pytest.fixture(scope="module")
def experiment():
    return FidelityExperiment(ExperimentConfig(steps=400))


def test_axial_states_live_in_the_code(basis):
    states = axial_input_states(basis)
    assert len(states) == 6
    projector = basis.projector
    for psi in states:
        assert np.linalg.norm(psi) == pytest.approx(1.0)
        np.testing.assert_allclose(projector @ psi, psi, atol=1e-14)


def test_collective_noise_leaves_the_gate_intact(experiment):
    for nbar in (0.0, 1.0):
        row = experiment.point(0.0, nbar)
        assert row.f_mean == pytest.approx(1.0, abs=1e-6)
        assert row.leakage_mean <= 1e-9
        assert min(experiment.gate_action_fidelities(0.0, nbar)) == pytest.approx(1.0, abs=1e-6)


@pytest.mark.parametrize("nbar,g", sorted(PINNED_F_MEAN))
def test_pinned_fidelity(experiment, nbar, g):
    assert experiment.point(g, nbar).f_mean == pytest.approx(PINNED_F_MEAN[(nbar, g)], abs=1e-6)


def test_pinned_per_state_fidelity(experiment):
    row = experiment.point(0.3, 0.0)
    assert row.f_states == pytest.approx(PINNED_F_STATES, abs=1e-6)
    assert 0.0 < row.leakage_mean < 1.0


def test_thermal_noise_lowers_fidelity(experiment):
    for g in (0.01, 0.1, 0.3):
        assert experiment.point(g, 1.0).f_mean < experiment.point(g, 0.0).f_mean


def test_small_g_slope_from_simulation():
    g_values = tuple(float(g) for g in np.logspace(-2.5, -1, 6))
    curve = gate_fidelity_experiment(ExperimentConfig(g_values=g_values, nbar_values=(0.0,), steps=400))
    fit = fit_small_g_slope(curve, (3e-3, 0.11))
    assert fit.points == 6
    assert 1.7 <= fit.slope <= 2.3


def test_parallel_sweep_matches_serial():
    base = ExperimentConfig(g_values=(0.05, 0.2), nbar_values=(0.0,), steps=400)
    serial = gate_fidelity_experiment(base)
    parallel = gate_fidelity_experiment(ExperimentConfig(g_values=(0.05, 0.2), nbar_values=(0.0,), steps=400, workers=2))
    assert [r.g for r in parallel.rows] == [0.05, 0.2]
    for a, b in zip(serial.rows, parallel.rows):
        assert a.f_states == pytest.approx(b.f_states, abs=1e-12)


def test_other_nf_spectator_runs():
    cfg = ExperimentConfig(g_values=(0.1,), nbar_values=(0.0,), steps=400, nf_state=3)
    row = gate_fidelity_experiment(cfg).rows[0]
    assert 0.9 < row.f_mean < 1.0


@pytest.mark.parametrize("power", [1.0, 2.0])
def test_slope_of_exact_power_law(power):
    pairs = [(g, 1.0 - g**power) for g in np.logspace(-3, -1, 10)]
    fit = fit_small_g_slope(pairs, (9e-4, 0.11))
    assert fit.slope == pytest.approx(power, abs=1e-6)
    assert fit.points == 10


def test_slope_needs_enough_points_off_the_plateau():
    pairs = [(g, 1.0 - 1e-12) for g in np.logspace(-3, -1, 10)]
    with pytest.raises(InsufficientDataError):
        fit_small_g_slope(pairs, (1e-3, 1e-1))
    with pytest.raises(InsufficientDataError):
        fit_small_g_slope([(0.01, 0.9), (0.02, 0.8)], (1e-3, 1e-1))


def test_curve_csv(tmp_path):
    rows = [
        FidelityRow(g=0.1, nbar=1.0, f_states=(0.9,) * 6, leakage_mean=0.01),
        FidelityRow(g=0.01, nbar=0.0, f_states=(0.99, 0.98, 0.97, 0.96, 0.95, 0.94), leakage_mean=0.0),
    ]
    path = write_curve_csv(FidelityCurve(rows), tmp_path / "out" / "curve.csv")
    assert path.read_text().splitlines()[0].split(",") == CSV_COLUMNS
    loaded = read_curve_csv(path)
    assert [(r.nbar, r.g) for r in loaded.rows] == [(0.0, 0.01), (1.0, 0.1)]
    assert loaded.rows[0].f_mean == pytest.approx(0.965)


def test_curve_csv_errors(tmp_path):
    with pytest.raises(ConfigError):
        read_curve_csv(tmp_path / "missing.csv")
    bad = tmp_path / "bad.csv"
    bad.write_text("g,F\n0.1,0.9\n")
    with pytest.raises(ConfigError):
        read_curve_csv(bad)


@pytest.mark.slow
def test_default_sweep_reproduces_the_fidelity_curve(tmp_path):
    cfg = load_experiment_config(str(CONFIG_DIR / "fig1.json"))
    curve = gate_fidelity_experiment(cfg)
    assert len(curve.rows) == 60
    write_curve_csv(curve, tmp_path / "fig1.csv")

    by_nbar = {nbar: curve.for_nbar(nbar) for nbar in (0.0, 1.0)}
    for rows in by_nbar.values():
        assert rows[0].f_mean < 1.0
        assert all(0.0 <= r.f_mean <= 1.0 for r in rows)
        head = [r.f_mean for r in rows if r.g <= 0.4]
        assert all(b < a for a, b in zip(head, head[1:]))
        # weights e^{-pg} shrink the noise itself at large g
        assert rows[-1].f_mean > min(r.f_mean for r in rows)
    for cold, hot in zip(by_nbar[0.0], by_nbar[1.0]):
        assert hot.f_mean < cold.f_mean

    fit = fit_small_g_slope(curve, cfg.slope_window, nbar=0.0)
    assert fit.points == 15
    assert 1.7 <= fit.slope <= 2.3
    at = {r.g: r.f_mean for r in by_nbar[0.0]}
    assert at[1.0] == pytest.approx(PINNED_F_MEAN[(0.0, 1.0)], abs=1e-6)


def test_ideal_run_does_not_depend_on_the_spectator():
    for nbar in (0.0, 1.0):
        runs = [
            FidelityExperiment(ExperimentConfig(g_values=(0.0,), steps=400, nf_state=nf)).ideal(nbar) for nf in (1, 2, 3)
        ]
        for other in runs[1:]:
            np.testing.assert_allclose(other, runs[0], atol=1e-8)


def test_g0_fidelity_does_not_depend_on_the_spectator():
    means = [
        FidelityExperiment(ExperimentConfig(g_values=(0.0,), steps=400, nf_state=nf)).point(0.0, 1.0).f_mean
        for nf in (1, 2, 3)
    ]
    assert max(means) - min(means) <= 1e-8


def test_sweep_csv_is_reproducible(tmp_path):
    base = ExperimentConfig(g_values=(0.02, 0.2), nbar_values=(0.0, 1.0), steps=400)
    paths = [
        write_curve_csv(gate_fidelity_experiment(cfg), tmp_path / f"run{k}.csv")
        for k, cfg in enumerate([base, base, dataclasses.replace(base, workers=3)])
    ]
    first = paths[0].read_bytes()
    assert all(p.read_bytes() == first for p in paths[1:])
