"""Configuration defaults, validation and round-trip tests."""

import pytest

from offgrid.config import (
    SystemConfig,
    config_from_dict,
    config_to_dict,
    default_config,
    load_config,
    save_config,
)
from offgrid.errors import ConfigError


class TestDefaults:
    def test_empty_file_gives_reference_system(self, tmp_path):
        path = tmp_path / "empty.yaml"
        path.write_text("")
        cfg = load_config(path)
        assert cfg.pv.p_rated_w == 285.0
        assert cfg.pv.gamma_pct_per_c == -0.39
        assert cfg.inverter_efficiency == 0.9
        assert cfg.pv.n_panels == 3
        assert cfg.battery.e_min_wh == 1080.0
        assert cfg.battery.e_max_wh == 5400.0
        assert cfg.battery.e_charge_max_wh == 810.0
        assert cfg.battery.e_discharge_max_wh == 844.5
        assert cfg.fridge.p_rated_w == 250.0
        assert cfg.fridge.cop == 0.2324
        assert (cfg.fridge.t_min_c, cfg.fridge.t_max_c) == (0.0, 4.0)
        assert cfg.mpc.lambda4 == 10.0
        assert cfg.step_hours == pytest.approx(1.0 / 6.0)
        assert cfg.horizon_steps == 144

    def test_missing_file_errors(self, tmp_path):
        with pytest.raises(ConfigError, match="not found"):
            load_config(tmp_path / "nope.yaml")

    def test_partial_override(self, tmp_path):
        path = tmp_path / "c.yaml"
        path.write_text("pv:\n  n_panels: 5\nbattery:\n  e_max_wh: 10800\n  e_min_wh: 2160\n")
        cfg = load_config(path)
        assert cfg.pv.n_panels == 5
        assert cfg.pv.p_rated_w == 285.0  # untouched default
        assert cfg.battery.e_max_wh == 10800


class TestValidation:
    def test_inverter_efficiency_range(self):
        with pytest.raises(ConfigError, match="inverter efficiency"):
            SystemConfig(inverter_efficiency=1.2)

    def test_horizon_at_least_one(self):
        with pytest.raises(ConfigError, match="horizon"):
            SystemConfig(horizon_steps=0)

    def test_unknown_field_reports_path(self):
        with pytest.raises(ConfigError, match="pv"):
            config_from_dict({"pv": {"n_panls": 3}})

    def test_unknown_top_level(self):
        with pytest.raises(ConfigError, match="unknown top-level"):
            config_from_dict({"battrey": {}})

    def test_crossed_battery_bounds(self):
        with pytest.raises(ConfigError):
            config_from_dict({"battery": {"e_min_wh": 6000.0, "e_max_wh": 5400.0}})

    def test_crossed_fridge_band(self):
        with pytest.raises(ConfigError):
            config_from_dict({"fridge": {"t_min_c": 5.0, "t_max_c": 4.0}})

    def test_gamma_bounds_must_straddle_zero(self):
        with pytest.raises(ConfigError):
            config_from_dict({"mpc": {"gamma_min": 0.5}})


class TestRoundTrip:
    def test_default_round_trips(self, tmp_path):
        cfg = default_config()
        path = tmp_path / "cfg.yaml"
        save_config(cfg, path)
        assert load_config(path) == cfg

    def test_modified_round_trips(self, tmp_path):
        cfg = config_from_dict({
            "pv": {"n_panels": 4, "faiman_literal": True},
            "battery": {"eta_charge": 0.85},
            "loads": {"fan_windows": ["20:30-07:15"], "n_fans": 2},
            "mpc": {"lambda4": 3.5},
            "step_minutes": 15,
            "horizon_steps": 96,
        })
        path = tmp_path / "cfg.yaml"
        save_config(cfg, path)
        again = load_config(path)
        assert again == cfg
        assert config_to_dict(again) == config_to_dict(cfg)

    def test_dict_round_trip(self):
        cfg = default_config()
        assert config_from_dict(config_to_dict(cfg)) == cfg
