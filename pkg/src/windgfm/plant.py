"""Reduced-order plant: per-unit system, packing, equilibrium, integration."""
from __future__ import annotations

import enum
import math
from dataclasses import dataclass

import numpy as np

from . import _kernel
from ._kernel.layout import (
    N_PARAMS, P_BETADEL, P_BETAMAX, P_BETAMIN, P_BG, P_BM, P_CDC, P_CP0,
    P_CPMAX, P_JG, P_JWT, P_KDG, P_KDM, P_KG, P_KILIM, P_KP, P_KPLIM, P_KTG,
    P_KTM, P_LAMC, P_OMDEL, P_OMMAX, P_PCONST, P_PG0, P_PMAX, P_PSCALE,
    P_RATE, P_TDC, P_TG, P_TSERVO, P_VDCS, P_W0,
)
from .aero import CALIBRATED_COEFFS, CpSurface, TurbineParams, cp, tip_speed_ratio
from .control import ControlGains


class Mode(enum.IntEnum):
    GFL_MPPT = 0
    GFM_MPPT = 1
    GFM_FR = 2


class PlantError(RuntimeError):
    pass


@dataclass(frozen=True)
class SgParams:
    """Synchronous generator with first-order governor."""

    h_g: float = 4.0        # s, inertia constant on own rating
    t_g: float = 0.5        # s, governor time constant
    droop: float = 0.05     # pu on own rating
    rating: float = 210e6   # VA

    def __post_init__(self):
        if min(self.h_g, self.t_g, self.droop, self.rating) <= 0:
            raise ValueError("SG parameters must be positive")

    def j_g(self, s_base: float) -> float:
        return 2.0 * self.h_g * self.rating / s_base

    def k_g(self, s_base: float) -> float:
        return (self.rating / s_base) / self.droop


@dataclass(frozen=True)
class NetworkParams:
    """Per-unit network and DC-link constants on the aggregate WT base."""

    b_g: float = 100.0          # pu synchronizing coefficient, SG-GSC line
    b_msc: float = 5.0          # pu synchronizing coefficient, machine link
    c_dc: float = 0.3999435264  # pu DC-link capacitance coefficient
    s_base: float = 50e6        # VA
    f_hz: float = 50.0          # Hz

    def __post_init__(self):
        if min(self.b_g, self.b_msc, self.c_dc, self.s_base, self.f_hz) <= 0:
            raise ValueError("network parameters must be positive")


@dataclass(frozen=True)
class PlantParams:
    turbine: TurbineParams
    sg: SgParams
    network: NetworkParams


@dataclass(frozen=True)
class LoadProfile:
    """Piecewise-constant load: base plus step events (time s, dP pu)."""

    base: float = 2.0
    events: tuple = ((30.0, 0.4),)

    def value(self, t: float) -> float:
        pl = self.base
        for t_ev, dp in self.events:
            if t >= t_ev:
                pl += dp
        return pl

    @property
    def ev_times(self) -> tuple:
        return tuple(t for t, _ in self.events)

    @property
    def ev_steps(self) -> tuple:
        return tuple(dp for _, dp in self.events)


@dataclass(frozen=True)
class OperatingPoint:
    """Steady-state data fixed for one run."""

    v_w: float
    omega_del: float    # pu
    beta_del: float     # deg
    p_wt0: float        # pu, initial WT power
    p_g0: float         # pu, governor reference
    p_const: float      # pu, GFL constant injection


def pmsg_power(b_msc: float, theta_r: float, theta_msc: float) -> float:
    return b_msc * math.sin(theta_r - theta_msc)


def gsc_power(lines, theta_gsc: float) -> float:
    """Sum of b_k sin(theta_gsc - theta_k) over (b, theta) line tuples."""
    if not lines:
        raise ValueError("at least one line required")
    return sum(b * math.sin(theta_gsc - th) for b, th in lines)


def wind_power_pu(params: TurbineParams, surface: CpSurface, v_w: float,
                  omega_pu: float, beta: float) -> float:
    """WT power in system pu (aggregate base = n_agg * P_rated)."""
    lam = tip_speed_ratio(params.R, omega_pu * params.omega_nom, v_w)
    return params.swept_k * cp(surface, lam, beta) * v_w ** 3 / params.P_rated


def pack_params(plant: PlantParams, gains: ControlGains, surface: CpSurface,
                v_w: float, p_g0: float, p_const: float) -> np.ndarray:
    """Flat parameter vector for the simulation kernels (calibrated surface)."""
    if surface.variant != "calibrated":
        raise PlantError("kernels require the calibrated analytic surface")
    tb, sg, nw = plant.turbine, plant.sg, plant.network
    p = np.zeros(N_PARAMS)
    p[P_JG] = sg.j_g(nw.s_base)
    p[P_TG] = sg.t_g
    p[P_KG] = sg.k_g(nw.s_base)
    p[P_BG] = nw.b_g
    p[P_BM] = nw.b_msc
    p[P_JWT] = tb.n_agg * tb.J_wt * tb.omega_nom ** 2 / nw.s_base
    p[P_CDC] = nw.c_dc
    p[P_TDC] = gains.gsc.t_dc
    p[P_KDG] = gains.gsc.k_d
    p[P_KTG] = gains.gsc.k_theta
    p[P_KDM] = gains.msc.k_d
    p[P_KTM] = gains.msc.k_theta
    p[P_OMDEL] = gains.omega_del
    p[P_BETADEL] = gains.pitch.beta_del
    p[P_KP] = gains.pitch.k_p
    p[P_TSERVO] = gains.pitch.t_servo
    p[P_RATE] = gains.pitch.rate_limit
    p[P_KPLIM] = gains.pitch.kp_lim
    p[P_KILIM] = gains.pitch.ki_lim
    p[P_PMAX] = gains.pitch.p_max_msc
    p[P_OMMAX] = gains.pitch.omega_max
    p[P_W0] = gains.omega_0
    p[P_VDCS] = gains.v_dc_star
    p[P_PG0] = p_g0
    p[P_PCONST] = p_const
    p[P_PSCALE] = tb.swept_k * v_w ** 3 / tb.P_rated
    p[P_LAMC] = tb.R * tb.omega_nom / v_w
    p[P_CP0:P_CP0 + 14] = surface.coeffs
    p[P_CPMAX] = surface.cpmax_scale
    p[P_BETAMIN] = gains.pitch.beta_min
    p[P_BETAMAX] = gains.pitch.beta_max
    return p


def closed_loop_derivative(x, t: float, p_arr: np.ndarray, mode: Mode,
                           load: LoadProfile) -> np.ndarray:
    """d state/dt of the 13-state closed loop via the active kernel."""
    x = np.asarray(x, dtype=float)
    if x[4] <= 0 or x[7] <= 0:
        raise PlantError(f"invalid state: v_dc={x[4]}, omega_r={x[7]}")
    return _kernel.derivative(x, t, p_arr, int(mode), load.base,
                              load.ev_times, load.ev_steps)


def rk4_step(f, x, t: float, dt: float):
    """Classical RK4 step for a generic vector field f(x, t)."""
    if dt <= 0:
        raise ValueError("dt must be positive")
    x = np.asarray(x, dtype=float)
    k1 = np.asarray(f(x, t))
    k2 = np.asarray(f(x + 0.5 * dt * k1, t + 0.5 * dt))
    k3 = np.asarray(f(x + 0.5 * dt * k2, t + 0.5 * dt))
    k4 = np.asarray(f(x + dt * k3, t + dt))
    return x + dt / 6.0 * (k1 + 2.0 * k2 + 2.0 * k3 + k4)


def step_rk4(x, t: float, dt: float, p_arr: np.ndarray, mode: Mode,
             load: LoadProfile) -> np.ndarray:
    out = rk4_step(lambda z, tt: closed_loop_derivative(z, tt, p_arr, mode, load),
                   x, t, dt)
    if np.any(np.abs(out) > 1e6):
        raise PlantError("state divergence detected")
    return out


def find_equilibrium(plant: PlantParams, gains: ControlGains,
                     surface: CpSurface, v_w: float, load: LoadProfile,
                     mode: Mode = Mode.GFM_FR) -> tuple[np.ndarray, np.ndarray, OperatingPoint]:
    """Pre-disturbance equilibrium (state, packed params, operating point).

    The algebraic solution (angle differences arcsin(P/b), v_dc = 1,
    omega_g = 1, omega_r = omega_del) is exact for this model; the residual
    of the closed-loop derivative is verified < 1e-9.
    """
    nw = plant.network
    om_del = gains.omega_del
    beta_del = gains.pitch.beta_del
    p_wt0 = wind_power_pu(plant.turbine, surface, v_w, om_del, beta_del)
    p_const = min(p_wt0, 1.0)
    base = load.base
    p_g0 = base - (p_const if mode == Mode.GFL_MPPT else p_wt0)
    p_arr = pack_params(plant, gains, surface, v_w, p_g0, p_const)
    if p_wt0 >= nw.b_g or p_wt0 >= nw.b_msc:
        raise PlantError("synchronizing coefficients too small for this power")
    rho1 = math.asin(p_wt0 / nw.b_g)
    rho2 = math.asin(p_wt0 / nw.b_msc)
    x0 = np.array([rho1, 0.0, 1.0, p_g0, 1.0, 0.0, rho2, om_del,
                   0.0, 0.0, beta_del, 0.0, 0.0])
    pre_load = LoadProfile(base=base, events=())
    resid = np.max(np.abs(closed_loop_derivative(x0, 0.0, p_arr, mode, pre_load)))
    if resid > 1e-9:
        raise PlantError(f"equilibrium residual {resid:.3e} exceeds 1e-9")
    op = OperatingPoint(v_w=v_w, omega_del=om_del, beta_del=beta_del,
                        p_wt0=p_wt0, p_g0=p_g0, p_const=p_const)
    return x0, p_arr, op


def simulate(x0, p_arr: np.ndarray, mode: Mode, load: LoadProfile,
             duration: float, dt: float, sample_dt: float = 1e-3) -> np.ndarray:
    """Integrate with the active kernel; rows are (t, 13 states)."""
    n_steps = int(round(duration / dt))
    stride = max(int(round(sample_dt / dt)), 1)
    for t_ev in load.ev_times:
        if abs(round(t_ev / dt) * dt - t_ev) > 1e-12:
            raise PlantError(f"event time {t_ev} not aligned to dt grid")
    try:
        return _kernel.simulate(np.asarray(x0, dtype=float), p_arr, int(mode),
                                dt, n_steps, stride, load.base,
                                load.ev_times, load.ev_steps)
    except FloatingPointError as e:
        raise PlantError(str(e)) from e
