from pathlib import Path

import pytest

from mimo_switch.config import apply_overrides, load_config
from mimo_switch.exceptions import ConfigurationError
from mimo_switch.models import AppConfig


def test_load_config_defaults_when_missing(mocker, tmp_path):
    mocker.patch("mimo_switch.config.user_config_path", return_value=tmp_path / "nonexistent")
    assert load_config() == AppConfig()

def test_load_config_explicit_path_missing(tmp_path):
    with pytest.raises(ConfigurationError, match="Config not found"):
        load_config(tmp_path / "missing.toml")

def test_load_config_parse_error(mocker, tmp_path):
    config_dir = tmp_path / "mimo_switch"
    config_dir.mkdir()
    (config_dir / "config.toml").write_text("invalid toml content [")

    mocker.patch("mimo_switch.config.user_config_path", return_value=config_dir)

    with pytest.raises(ConfigurationError, match="Config parse error"):
        load_config()

def test_load_config_invalid_value(tmp_path):
    path = tmp_path / "config.toml"
    path.write_text("[run]\nn_trials = 0\n")
    with pytest.raises(ConfigurationError, match="Config parse error"):
        load_config(path)

def test_load_config_success(tmp_path):
    path = tmp_path / "config.toml"
    path.write_text(
        """
        [system]
        tx_power_dbm = 20.0

        [timing]
        cw_min = 15

        [run]
        mode = "practical"
        n_trials = 200
        protocols = ["adaptive"]
        """
    )
    config = load_config(path)
    assert config.system.tx_power_dbm == 20.0
    assert config.timing.cw_min == 15
    assert config.run.mode == "practical"
    assert config.run.protocols == ("single", "adaptive")

def test_overrides_only_given_flags():
    base = AppConfig()
    config = apply_overrides(base, n_trials=50, seed=None, out_dir=Path("elsewhere"))
    assert config.run.n_trials == 50
    assert config.run.seed == base.run.seed
    assert config.run.out_dir == Path("elsewhere")
    assert config.system == base.system

def test_overrides_are_validated():
    with pytest.raises(ConfigurationError, match="Invalid run option"):
        apply_overrides(AppConfig(), n_trials=-3)
