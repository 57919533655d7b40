"""Scenario configuration: JSON schema, defaults, dotted --set overrides."""
from __future__ import annotations

import copy
import json

from .aero import CpSurface, TurbineParams
from .gaindesign import PRESETS, DesignSpec
from .plant import LoadProfile, Mode, NetworkParams, PlantParams, SgParams


class ConfigError(ValueError):
    pass


DEFAULT_CONFIG = {
    "turbine": {
        "rho": 1.225, "R": 63.0, "J_wt": 35.328e6, "omega_nom": 1.37,
        "omega_max": 1.2, "P_rated": 5e6, "v_rated": 11.23, "n_agg": 10,
    },
    "sg": {
        "h_g": 4.0, "t_g": 0.5, "droop": 0.05, "rating": 210e6,
    },
    "network": {
        "b_g": 100.0, "b_msc": 5.0, "c_dc": 0.3999435264,
        "s_base": 50e6, "f_hz": 50.0,
    },
    "control": {
        "preset": "table3",
        "d_omega_max": None, "d_v_max": 0.02, "msc_floor": 1.0,
        "target_droop": None, "k_d_gsc": 0.0067, "t_dc": 0.005,
        "k_q_gsc": 0.02, "k_q_msc": 0.05,
    },
    "scenario": {
        "mode": "GFM_FR", "v_w": 8.0, "eta": 0.9,
        "base_load": 2.0, "events": [[30.0, 0.4]],
        "duration": 60.0, "dt": 5e-4, "sample_dt": 1e-3,
    },
}


def load_config(path: str | None) -> dict:
    cfg = copy.deepcopy(DEFAULT_CONFIG)
    if path is None:
        return cfg
    try:
        with open(path) as fh:
            user = json.load(fh)
    except (OSError, json.JSONDecodeError) as e:
        raise ConfigError(f"cannot read config {path}: {e}") from e
    if not isinstance(user, dict):
        raise ConfigError("config root must be an object")
    for key, val in user.items():
        if key not in cfg:
            raise ConfigError(f"unknown top-level key {key!r}")
        if not isinstance(val, dict):
            raise ConfigError(f"section {key!r} must be an object")
        for k2, v2 in val.items():
            if k2 not in cfg[key]:
                raise ConfigError(f"unknown key {key}.{k2}")
            cfg[key][k2] = v2
    return cfg


def apply_overrides(cfg: dict, sets: list[str]) -> dict:
    """Apply `--set section.key=value` overrides (values parsed as JSON)."""
    for item in sets:
        if "=" not in item:
            raise ConfigError(f"bad override {item!r}, expected key=value")
        key, _, raw = item.partition("=")
        parts = key.split(".")
        if len(parts) != 2 or parts[0] not in cfg or parts[1] not in cfg[parts[0]]:
            raise ConfigError(f"unknown config key {key!r}")
        try:
            val = json.loads(raw)
        except json.JSONDecodeError:
            val = raw  # bare strings allowed, e.g. mode=GFM_FR
        cfg[parts[0]][parts[1]] = val
    return cfg


def make_turbine(cfg: dict) -> TurbineParams:
    try:
        return TurbineParams(**cfg["turbine"])
    except (TypeError, ValueError) as e:
        raise ConfigError(f"turbine: {e}") from e


def make_plant(cfg: dict) -> PlantParams:
    try:
        return PlantParams(turbine=make_turbine(cfg),
                           sg=SgParams(**cfg["sg"]),
                           network=NetworkParams(**cfg["network"]))
    except (TypeError, ValueError) as e:
        raise ConfigError(f"plant: {e}") from e


def make_design_spec(cfg: dict) -> DesignSpec:
    c = dict(cfg["control"])
    preset = c.pop("preset", "table3")
    if preset not in PRESETS:
        raise ConfigError(f"unknown preset {preset!r}")
    base = PRESETS[preset]
    if c.get("d_omega_max") is None:
        c["d_omega_max"] = base.d_omega_max
    try:
        return DesignSpec(**c)
    except (TypeError, ValueError) as e:
        raise ConfigError(f"control: {e}") from e


def make_mode(name: str) -> Mode:
    try:
        return Mode[name]
    except KeyError:
        raise ConfigError(f"unknown mode {name!r}") from None


def make_load(cfg: dict) -> LoadProfile:
    sc = cfg["scenario"]
    events = tuple((float(t), float(dp)) for t, dp in sc["events"])
    return LoadProfile(base=float(sc["base_load"]), events=events)


def make_surface(cfg: dict) -> CpSurface:
    return CpSurface()
