"""Dual-port converter controllers, Q-V droop, pitch control, GFL baseline."""
from __future__ import annotations

from dataclasses import dataclass, replace

from .aero import CpSurface, TurbineParams, cp, find_mpp


@dataclass(frozen=True)
class ConverterGains:
    """One converter channel of the dual-port frequency law plus Q-V droop."""

    k_theta: float          # pu-freq / pu-Vdc
    k_d: float = 0.0        # pu-freq*s / pu-Vdc
    t_dc: float = 0.005     # s, DC-filter time constant
    k_q: float = 0.02       # pu-V / pu-Q
    t_v: float = 0.05       # s, Q-filter time constant
    v_star: float = 1.0     # pu
    q_star: float = 0.0     # pu

    def __post_init__(self):
        if self.k_theta <= 0 or self.t_dc <= 0 or self.t_v <= 0:
            raise ValueError("k_theta, t_dc, t_v must be positive")
        if self.k_d < 0:
            raise ValueError("k_d must be non-negative")


@dataclass(frozen=True)
class PitchGains:
    k_p: float = 0.0        # deg / pu-speed
    beta_del: float = 0.0   # deg
    kp_lim: float = 50.0    # limiter PI proportional gain (both channels)
    ki_lim: float = 20.0    # limiter PI integral gain
    p_max_msc: float = 1.05  # pu
    omega_max: float = 1.2  # pu
    t_servo: float = 0.3    # s
    rate_limit: float = 8.0  # deg/s
    beta_min: float = 0.0
    beta_max: float = 30.0

    def __post_init__(self):
        if self.t_servo <= 0 or self.rate_limit <= 0:
            raise ValueError("t_servo and rate_limit must be positive")
        if self.beta_max <= self.beta_min:
            raise ValueError("empty pitch range")


@dataclass(frozen=True)
class ControlGains:
    gsc: ConverterGains
    msc: ConverterGains
    pitch: PitchGains
    v_dc_star: float = 1.0
    omega_0: float = 1.0    # pu, GSC frequency setpoint
    omega_del: float = 1.0  # pu, MSC (rotor) frequency setpoint

    @property
    def theorem1_ratio_ok(self) -> bool:
        """Whether k_d/k_theta matches between the two converters (1e-9 rel)."""
        rg = self.gsc.k_d / self.gsc.k_theta
        rm = self.msc.k_d / self.msc.k_theta
        scale = max(abs(rg), abs(rm), 1e-30)
        return abs(rg - rm) / scale < 1e-9 or abs(rg - rm) < 1e-12

    def with_ratio_condition(self) -> "ControlGains":
        """Return gains with k_d_msc = k_d_gsc * k_theta_msc / k_theta_gsc."""
        kdm = self.gsc.k_d * self.msc.k_theta / self.gsc.k_theta
        return replace(self, msc=replace(self.msc, k_d=kdm))


def pd_filter_realization(k_theta: float, k_d: float, t_dc: float,
                          x: float, u: float) -> tuple[float, float]:
    """First-order realization of H(s) = (k_theta + k_d s)/(t_dc s + 1).

    Returns (y, dx/dt) with dx/dt = (u - x)/t_dc and
    y = (k_theta - k_d/t_dc) x + (k_d/t_dc) u.
    """
    if t_dc <= 0:
        raise ValueError("t_dc must be positive")
    y = (k_theta - k_d / t_dc) * x + (k_d / t_dc) * u
    return y, (u - x) / t_dc


def gsc_frequency(gains: ControlGains, x_gsc: float, v_dc: float) -> float:
    y, _ = pd_filter_realization(gains.gsc.k_theta, gains.gsc.k_d,
                                 gains.gsc.t_dc, x_gsc, v_dc - gains.v_dc_star)
    return gains.omega_0 + y


def msc_frequency(gains: ControlGains, x_msc: float, v_dc: float) -> float:
    y, _ = pd_filter_realization(gains.msc.k_theta, gains.msc.k_d,
                                 gains.msc.t_dc, x_msc, v_dc - gains.v_dc_star)
    return gains.omega_del + y


def qv_droop(k_q: float, v_star: float, q_star: float, q_filt: float) -> float:
    """V = v_star + k_q (q_star - filtered Q)."""
    return v_star + k_q * (q_star - q_filt)


def qv_filter_derivative(t_v: float, q_filt: float, q_meas: float) -> float:
    if t_v <= 0:
        raise ValueError("t_v must be positive")
    return (q_meas - q_filt) / t_v


def limiter_pi(kp: float, ki: float, err: float, integ: float) -> tuple[float, float]:
    """One-sided (output >= 0) PI with integrator freeze as anti-windup.

    Returns (output, d integ/dt).
    """
    u = kp * err + integ
    di = ki * err
    if u <= 0.0:
        u = 0.0
        if err < 0.0:
            di = ki * err if integ > 0.0 else 0.0
    return u, di


def pitch_reference(gains: ControlGains, i_speed: float, i_power: float,
                    omega_r: float, p_msc: float) -> tuple[float, float, float]:
    """(beta_ref, d i_speed/dt, d i_power/dt).

    beta_ref = beta_del + k_p (omega_r - omega_del) + u_speed + u_power with
    one-sided limiter PIs on rotor overspeed and MSC overpower; result clamped
    to the pitch range.
    """
    pg = gains.pitch
    u_sp, di_sp = limiter_pi(pg.kp_lim, pg.ki_lim, omega_r - pg.omega_max, i_speed)
    u_pw, di_pw = limiter_pi(pg.kp_lim, pg.ki_lim, p_msc - pg.p_max_msc, i_power)
    beta_ref = pg.beta_del + pg.k_p * (omega_r - gains.omega_del) + u_sp + u_pw
    beta_ref = min(max(beta_ref, pg.beta_min), pg.beta_max)
    return beta_ref, di_sp, di_pw


def pitch_servo(gains: PitchGains, beta: float, beta_ref: float) -> float:
    """Rate- and range-limited first-order servo: returns d beta/dt."""
    d = (beta_ref - beta) / gains.t_servo
    d = min(max(d, -gains.rate_limit), gains.rate_limit)
    if beta <= gains.beta_min and d < 0.0:
        d = 0.0
    if beta >= gains.beta_max and d > 0.0:
        d = 0.0
    return d


def gfl_mppt_emulation(params: TurbineParams, surface: CpSurface,
                       v_w: float) -> tuple[float, float]:
    """Constant-power GFL baseline: (P_gsc pu on aggregate rating, v_dc pu).

    Injects min(P_mpp(v_w), rated) with the DC link pinned at 1 pu and no
    frequency response.
    """
    lam_mpp, cp_max = find_mpp(surface)
    omega_max_rad = params.omega_max * params.omega_nom
    lam = min(lam_mpp, params.R * omega_max_rad / v_w)
    p_pu = params.swept_k * cp(surface, lam, 0.0) * v_w ** 3 / params.P_rated
    return min(p_pu, 1.0), 1.0
