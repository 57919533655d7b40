"""Scenario runner, frequency metrics, mode comparison, and CSV emission."""
from __future__ import annotations

import io
import json
import math
from dataclasses import dataclass

import numpy as np

from .aero import CpSurface, cp
from .config import (
    ConfigError, make_design_spec, make_load, make_mode, make_plant,
    make_surface,
)
from .control import gfl_mppt_emulation, pd_filter_realization
from .gaindesign import DesignSpec, GainDesign, design_gains, mppt_gains
from .plant import (
    LoadProfile, Mode, PlantParams, find_equilibrium, simulate,
)

TRACE_COLUMNS = ("t", "f_g", "f_gsc", "v_dc", "omega_r", "beta",
                 "P_wt", "P_gsc", "P_g")


class HarnessAssertionError(AssertionError):
    pass


@dataclass(frozen=True)
class Scenario:
    mode: Mode = Mode.GFM_FR
    v_w: float = 8.0
    eta: float = 0.9
    load: LoadProfile = LoadProfile()
    duration: float = 60.0
    dt: float = 5e-4
    sample_dt: float = 1e-3
    spec: DesignSpec = DesignSpec()

    def __post_init__(self):
        if self.duration <= 0 or self.dt <= 0:
            raise ValueError("duration and dt must be positive")
        for t_ev, _ in self.load.events:
            if not 0.0 < t_ev < self.duration:
                raise ValueError("events must fall inside the run")


def scenario_from_config(cfg: dict) -> Scenario:
    sc = cfg["scenario"]
    try:
        return Scenario(mode=make_mode(sc["mode"]), v_w=float(sc["v_w"]),
                        eta=float(sc["eta"]), load=make_load(cfg),
                        duration=float(sc["duration"]), dt=float(sc["dt"]),
                        sample_dt=float(sc["sample_dt"]),
                        spec=make_design_spec(cfg))
    except (ValueError, KeyError) as e:
        raise ConfigError(f"scenario: {e}") from e


@dataclass(frozen=True)
class SimTrace:
    t: np.ndarray
    f_g: np.ndarray
    f_gsc: np.ndarray
    v_dc: np.ndarray
    omega_r: np.ndarray
    beta: np.ndarray
    p_wt: np.ndarray
    p_gsc: np.ndarray
    p_g: np.ndarray

    def column(self, name: str) -> np.ndarray:
        return getattr(self, name.lower())

    def __post_init__(self):
        for name in TRACE_COLUMNS:
            col = self.column(name)
            if col.shape != self.t.shape or not np.all(np.isfinite(col)):
                raise ValueError(f"bad trace column {name}")


@dataclass(frozen=True)
class RunResult:
    trace: SimTrace
    design: GainDesign
    states: np.ndarray      # sampled kernel output (t + 13 states)
    p_wt0: float
    scenario: Scenario


@dataclass(frozen=True)
class FrequencyMetrics:
    nadir_hz: float
    t_nadir_s: float
    rocof_hz_per_s: float
    f_ss_hz: float
    dv_dc_ss_pu: float
    droop_measured: float

    def to_dict(self) -> dict:
        return {
            "nadir_hz": self.nadir_hz, "t_nadir_s": self.t_nadir_s,
            "rocof_hz_per_s": self.rocof_hz_per_s, "f_ss_hz": self.f_ss_hz,
            "dv_dc_ss_pu": self.dv_dc_ss_pu,
            "droop_measured": self.droop_measured,
        }


def gains_for_scenario(plant: PlantParams, surface: CpSurface,
                       scenario: Scenario) -> GainDesign:
    if scenario.mode == Mode.GFM_FR and scenario.eta < 1.0:
        return design_gains(plant.turbine, surface, scenario.v_w,
                            scenario.eta, scenario.spec)
    return mppt_gains(plant.turbine, surface, scenario.v_w, scenario.spec)


def run_scenario(plant: PlantParams, surface: CpSurface, scenario: Scenario,
                 check: bool = True) -> RunResult:
    design = gains_for_scenario(plant, surface, scenario)
    gains = design.gains
    x0, p_arr, op = find_equilibrium(plant, gains, surface, scenario.v_w,
                                     scenario.load, scenario.mode)
    states = simulate(x0, p_arr, scenario.mode, scenario.load,
                      scenario.duration, scenario.dt, scenario.sample_dt)
    trace = _trace_from_states(plant, surface, gains, scenario, states, op)
    result = RunResult(trace=trace, design=design, states=states,
                       p_wt0=op.p_wt0, scenario=scenario)
    if check:
        run_checks(result)
    return result


def _trace_from_states(plant, surface, gains, scenario, states, op) -> SimTrace:
    f_base = plant.network.f_hz
    t = states[:, 0]
    om_g = states[:, 3]
    p_g = states[:, 4]
    v = states[:, 5]
    om_r = states[:, 8]
    xg = states[:, 9]
    beta = states[:, 11]
    if scenario.mode == Mode.GFL_MPPT:
        p_const, vdc = gfl_mppt_emulation(plant.turbine, surface, scenario.v_w)
        n = t.size
        return SimTrace(t=t, f_g=f_base * om_g, f_gsc=f_base * om_g,
                        v_dc=np.full(n, vdc), omega_r=np.full(n, op.omega_del),
                        beta=np.full(n, gains.pitch.beta_del),
                        p_wt=np.full(n, p_const),
                        p_gsc=np.full(n, p_const), p_g=p_g)
    u = v - gains.v_dc_star
    y = (gains.gsc.k_theta - gains.gsc.k_d / gains.gsc.t_dc) * xg \
        + (gains.gsc.k_d / gains.gsc.t_dc) * u
    om_gsc = gains.omega_0 + y
    p_gsc = plant.network.b_g * np.sin(states[:, 1] - states[:, 2])
    scale = plant.turbine.swept_k * scenario.v_w ** 3 / plant.turbine.P_rated
    lam_c = plant.turbine.R * plant.turbine.omega_nom / scenario.v_w
    p_wt = np.array([scale * cp(surface, lam_c * o, b)
                     for o, b in zip(om_r, beta)])
    return SimTrace(t=t, f_g=f_base * om_g, f_gsc=f_base * om_gsc,
                    v_dc=v, omega_r=om_r, beta=beta, p_wt=p_wt,
                    p_gsc=p_gsc, p_g=p_g)


def run_checks(result: RunResult) -> None:
    """Steady-state invariant checks after a run (raises on violation)."""
    sc = result.scenario
    if sc.mode == Mode.GFL_MPPT:
        return
    gains = result.design.gains
    states = result.states
    tail = states[states[:, 0] >= states[-1, 0] - 2.0]
    om_g = tail[:, 3].mean()
    v = tail[:, 5].mean()
    om_r = tail[:, 8].mean()
    xg = tail[:, 9].mean()
    xm = tail[:, 10].mean()
    beta = tail[:, 11].mean()
    u = v - gains.v_dc_star
    yg, _ = pd_filter_realization(gains.gsc.k_theta, gains.gsc.k_d,
                                  gains.gsc.t_dc, xg, u)
    ym, _ = pd_filter_realization(gains.msc.k_theta, gains.msc.k_d,
                                  gains.msc.t_dc, xm, u)
    om_gsc = gains.omega_0 + yg
    om_msc = gains.omega_del + ym
    dv = v - gains.v_dc_star
    if abs((om_gsc - gains.omega_0) - gains.gsc.k_theta * dv) >= 1e-3:
        raise HarnessAssertionError("GSC frequency/DC-voltage relation violated")
    if abs((om_msc - gains.omega_del) - gains.msc.k_theta * dv) >= 1e-3:
        raise HarnessAssertionError("MSC frequency/DC-voltage relation violated")
    # Near the MPP the rotor stiffness vanishes and the rotor-tracking mode
    # settles with a ~30 s time constant, so MPPT runs shorter than ~3 min
    # cannot reach the tight synchronization bound; use a relaxed one there.
    fr = sc.mode == Mode.GFM_FR and sc.eta < 1.0
    sync_tol = 1e-4 if fr else 5e-3
    if abs(om_gsc - om_g) >= sync_tol:
        raise HarnessAssertionError("GSC lost synchronism with the grid")
    if abs(om_msc - om_r) >= sync_tol:
        raise HarnessAssertionError("MSC lost synchronism with the rotor")
    tail_tr = result.trace.t >= result.trace.t[-1] - 2.0
    p_wt_ss = result.trace.p_wt[tail_tr].mean()
    d_p_wt = p_wt_ss - result.p_wt0
    if sc.mode == Mode.GFM_MPPT or sc.eta >= 1.0:
        if abs(d_p_wt) >= 0.005:
            raise HarnessAssertionError(
                f"MPPT steady-state power shifted by {d_p_wt:+.4f} pu")
    elif sc.mode == Mode.GFM_FR and math.isfinite(result.design.m_p) \
            and sc.load.events:
        d_om = om_g - 1.0
        if abs(d_p_wt) > 1e-9:
            m_meas = -d_om / d_p_wt
            if abs(m_meas / result.design.m_p - 1.0) >= 0.02:
                raise HarnessAssertionError(
                    f"measured droop {m_meas:.4f} deviates from design "
                    f"{result.design.m_p:.4f} by more than 2%")


def compute_metrics(trace: SimTrace, t_event: float,
                    rocof_window: float = 0.1,
                    f_base: float = 50.0) -> FrequencyMetrics:
    if trace.t[-1] < t_event + 2.0:
        raise ValueError("trace too short for metrics")
    pre = trace.t < t_event
    post = trace.t >= t_event
    t_post = trace.t[post]
    f_post = trace.f_g[post]
    i_nadir = int(np.argmin(f_post))
    tail = trace.t >= trace.t[-1] - 2.0
    f_ss = float(trace.f_g[tail].mean())
    dv_ss = float(trace.v_dc[tail].mean() - trace.v_dc[pre].mean())
    dt_s = float(trace.t[1] - trace.t[0])
    w = max(int(round(rocof_window / dt_s)), 1)
    df = np.abs(trace.f_g[w:] - trace.f_g[:-w])
    rocof = float(df.max() / (w * dt_s))
    d_p_wt = float(trace.p_wt[tail].mean() - trace.p_wt[pre].mean())
    d_om = (f_ss - float(trace.f_g[pre].mean())) / f_base
    droop = -d_om / d_p_wt if abs(d_p_wt) > 1e-9 else 0.0
    return FrequencyMetrics(nadir_hz=float(f_post[i_nadir]),
                            t_nadir_s=float(t_post[i_nadir]),
                            rocof_hz_per_s=rocof, f_ss_hz=f_ss,
                            dv_dc_ss_pu=dv_ss, droop_measured=droop)


@dataclass(frozen=True)
class ModeComparison:
    metrics: dict           # mode name -> FrequencyMetrics
    results: dict           # mode name -> RunResult
    ordering_ok: bool
    ss_improved: bool


def compare_modes(plant: PlantParams, surface: CpSurface,
                  base: Scenario) -> ModeComparison:
    metrics = {}
    results = {}
    for mode in (Mode.GFL_MPPT, Mode.GFM_MPPT, Mode.GFM_FR):
        eta = base.eta if mode == Mode.GFM_FR else 1.0
        sc = Scenario(mode=mode, v_w=base.v_w, eta=eta, load=base.load,
                      duration=base.duration, dt=base.dt,
                      sample_dt=base.sample_dt, spec=base.spec)
        res = run_scenario(plant, surface, sc)
        results[mode.name] = res
        metrics[mode.name] = compute_metrics(res.trace, base.load.events[0][0],
                                             f_base=plant.network.f_hz)
    n_fr = metrics["GFM_FR"].nadir_hz
    n_mp = metrics["GFM_MPPT"].nadir_hz
    n_gfl = metrics["GFL_MPPT"].nadir_hz
    ordering_ok = n_fr > n_mp >= n_gfl
    ss_improved = metrics["GFM_FR"].f_ss_hz > max(metrics["GFM_MPPT"].f_ss_hz,
                                                  metrics["GFL_MPPT"].f_ss_hz)
    if base.eta < 1.0 and not ordering_ok:
        raise HarnessAssertionError(
            f"nadir ordering violated: FR={n_fr:.4f} MPPT={n_mp:.4f} "
            f"GFL={n_gfl:.4f}")
    return ModeComparison(metrics=metrics, results=results,
                          ordering_ok=ordering_ok, ss_improved=ss_improved)


def trace_to_csv(trace: SimTrace) -> str:
    buf = io.StringIO()
    buf.write(",".join(TRACE_COLUMNS) + "\n")
    cols = [trace.column(c) for c in TRACE_COLUMNS]
    for i in range(trace.t.size):
        buf.write(",".join(f"{c[i]:.17g}" for c in cols) + "\n")
    return buf.getvalue()


def trace_from_csv(text: str) -> SimTrace:
    lines = text.strip().split("\n")
    if lines[0].split(",") != list(TRACE_COLUMNS):
        raise ValueError("unexpected CSV header")
    data = np.array([[float(v) for v in ln.split(",")] for ln in lines[1:]])
    kw = {name.lower(): data[:, i] for i, name in enumerate(TRACE_COLUMNS)}
    return SimTrace(**kw)


def metrics_to_json(metrics: dict) -> str:
    return json.dumps({k: (m.to_dict() if isinstance(m, FrequencyMetrics) else m)
                       for k, m in metrics.items()}, indent=2, sort_keys=True)


def run_from_config(cfg: dict, check: bool = True) -> RunResult:
    plant = make_plant(cfg)
    surface = make_surface(cfg)
    scenario = scenario_from_config(cfg)
    return run_scenario(plant, surface, scenario, check=check)
