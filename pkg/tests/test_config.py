from pathlib import Path

import numpy as np
import pytest

from nsgate.config import DEFAULT_SLOPE_WINDOW, ExperimentConfig, Settings, get_settings, load_experiment_config
from nsgate.errors import ConfigError
from nsgate.gates.pulses import PulseShape

CONFIG_DIR = Path(__file__).resolve().parent.parent / "config"


def test_defaults_describe_the_standard_sweep():
    cfg = ExperimentConfig()
    assert len(cfg.g_values) == 30
    assert cfg.g_values[0] == pytest.approx(1e-3)
    assert cfg.g_values[-1] == pytest.approx(1.0)
    assert cfg.nbar_values == (0.0, 1.0)
    assert cfg.steps == 2000
    assert cfg.nf_state == 1
    np.testing.assert_allclose(cfg.reflection_axis(), [0.0, 0.0, 1.0], atol=1e-12)


def test_shipped_config_matches_defaults():
    cfg = load_experiment_config(str(CONFIG_DIR / "fig1.json"))
    defaults = ExperimentConfig()
    np.testing.assert_allclose(cfg.g_values, defaults.g_values, rtol=1e-12)
    assert cfg.slope_window == pytest.approx(DEFAULT_SLOPE_WINDOW)
    assert cfg.pulse == defaults.pulse
    assert cfg.output == "data/fig1.csv"


def test_quick_config_loads():
    cfg = load_experiment_config(str(CONFIG_DIR / "quick.json"))
    assert cfg.steps == 400
    assert cfg.workers == 2


def test_yaml_is_accepted(tmp_path):
    path = tmp_path / "exp.yaml"
    path.write_text("g_values: [0.01, 0.1]\nnbar_values: [0]\npulse:\n  shape: truncated-gaussian\n  amplitude: 1.0\n")
    cfg = load_experiment_config(str(path))
    assert cfg.g_values == (0.01, 0.1)
    assert cfg.pulse.shape is PulseShape.TRUNCATED_GAUSSIAN


def test_mapping_round_trip():
    cfg = ExperimentConfig.from_mapping({"g_values": [0.01, 0.1], "gate": "hadamard", "nf_state": 2, "workers": 3})
    assert ExperimentConfig.from_mapping(cfg.to_mapping()) == cfg


@pytest.mark.parametrize(
    "data",
    [
        {"colour": "blue"},
        {"g_values": [0.1, 0.01]},
        {"g_values": []},
        {"g_values": [-0.1, 0.1]},
        {"nbar_values": ["x"]},
        {"steps": 50},
        {"steps": True},
        {"nf_state": 4},
        {"workers": 0},
        {"pulse": {"shape": "triangle"}},
        {"pulse": "square"},
        {"gate": "s"},
        {"gate": "toffoli"},
        {"slope_window": [0.1, 0.01]},
    ],
)
def test_invalid_configs(data):
    with pytest.raises(ConfigError):
        ExperimentConfig.from_mapping(data)


def test_missing_and_malformed_files(tmp_path):
    with pytest.raises(ConfigError):
        load_experiment_config(str(tmp_path / "absent.json"))
    bad = tmp_path / "bad.json"
    bad.write_text("[1, 2, 3]")
    with pytest.raises(ConfigError):
        load_experiment_config(str(bad))
    broken = tmp_path / "broken.json"
    broken.write_text("{g_values: [")
    with pytest.raises(ConfigError):
        load_experiment_config(str(broken))


def test_settings_from_environment(monkeypatch):
    monkeypatch.setenv("NSGATE_WORKERS", "4")
    monkeypatch.setenv("NSGATE_DB_PATH", "")
    get_settings.cache_clear()
    settings = get_settings()
    assert settings.workers == 4
    assert not settings.ledger_enabled
    assert Settings().battery_steps == 400
    monkeypatch.delenv("NSGATE_WORKERS")
    assert Settings().workers is None
