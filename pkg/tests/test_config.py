import json

import pytest

from windgfm.config import (
    ConfigError, DEFAULT_CONFIG, apply_overrides, load_config,
    make_design_spec, make_load, make_mode, make_plant, make_surface,
    make_turbine,
)
from windgfm.plant import Mode


def test_defaults_load_without_file():
    cfg = load_config(None)
    assert cfg == DEFAULT_CONFIG
    assert cfg is not DEFAULT_CONFIG  # deep copy


def test_load_config_merges_partial_file(tmp_path):
    path = tmp_path / "cfg.json"
    path.write_text(json.dumps({"scenario": {"v_w": 10.0}}))
    cfg = load_config(str(path))
    assert cfg["scenario"]["v_w"] == 10.0
    assert cfg["scenario"]["eta"] == 0.9  # untouched default


def test_load_config_rejects_unknown_keys(tmp_path):
    path = tmp_path / "cfg.json"
    path.write_text(json.dumps({"scenario": {"windspeed": 10.0}}))
    with pytest.raises(ConfigError):
        load_config(str(path))
    path.write_text(json.dumps({"nonsense": {}}))
    with pytest.raises(ConfigError):
        load_config(str(path))
    path.write_text("not json")
    with pytest.raises(ConfigError):
        load_config(str(path))
    with pytest.raises(ConfigError):
        load_config(str(tmp_path / "missing.json"))


def test_apply_overrides(cfg):
    out = apply_overrides(cfg, ["scenario.v_w=10.0",
                                "scenario.mode=GFM_MPPT",
                                "scenario.events=[[20.0,0.3]]"])
    assert out["scenario"]["v_w"] == 10.0
    assert out["scenario"]["mode"] == "GFM_MPPT"  # bare string accepted
    assert out["scenario"]["events"] == [[20.0, 0.3]]


def test_apply_overrides_rejects_bad_keys(cfg):
    with pytest.raises(ConfigError):
        apply_overrides(cfg, ["scenario.v_w"])
    with pytest.raises(ConfigError):
        apply_overrides(cfg, ["scenario.nope=1"])
    with pytest.raises(ConfigError):
        apply_overrides(cfg, ["a.b.c=1"])


def test_factories(cfg):
    plant = make_plant(cfg)
    assert plant.turbine.R == 63.0
    assert plant.network.s_base == 50e6
    spec = make_design_spec(cfg)
    assert spec.d_omega_max == 0.01
    load = make_load(cfg)
    assert load.base == 2.0 and load.events == ((30.0, 0.4),)
    assert make_mode("GFM_FR") == Mode.GFM_FR
    assert make_surface(cfg).variant == "calibrated"


def test_preset_selects_excursion_budget(cfg):
    cfg["control"]["preset"] = "fig7"
    assert make_design_spec(cfg).d_omega_max == 0.005
    cfg["control"]["d_omega_max"] = 0.02
    assert make_design_spec(cfg).d_omega_max == 0.02
    cfg["control"]["preset"] = "bogus"
    with pytest.raises(ConfigError):
        make_design_spec(cfg)


def test_factory_errors_are_config_errors(cfg):
    cfg["turbine"]["R"] = -1.0
    with pytest.raises(ConfigError):
        make_turbine(cfg)
    with pytest.raises(ConfigError):
        make_mode("NOPE")
