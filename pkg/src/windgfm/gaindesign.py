"""Steady-state gain selection and the smallest-achievable-droop map."""
from __future__ import annotations

import io
import math
from dataclasses import dataclass

import numpy as np

from .aero import CpSurface, TurbineParams, find_mpp, power_sensitivities
from .control import ControlGains, ConverterGains, PitchGains
from .curtailment import deload_point


class ZeroStiffnessError(ValueError):
    pass


@dataclass(frozen=True)
class DesignSpec:
    d_omega_max: float = 0.01   # pu, largest expected grid-frequency deviation
    d_v_max: float = 0.02       # pu, allowed DC-voltage excursion
    msc_floor: float = 1.0      # pu, MSC gain floor when headroom vanishes
    target_droop: float | None = None  # pu, optional feasibility target
    k_d_gsc: float = 0.0067
    t_dc: float = 0.005         # s
    k_q_gsc: float = 0.02
    k_q_msc: float = 0.05

    def __post_init__(self):
        if self.d_omega_max <= 0 or self.d_v_max <= 0:
            raise ValueError("excursion limits must be positive")
        if self.msc_floor < 0:
            raise ValueError("msc_floor must be non-negative")


# presets per the two published operating assumptions
PRESETS = {"table3": DesignSpec(d_omega_max=0.01),
           "fig7": DesignSpec(d_omega_max=0.005)}


@dataclass(frozen=True)
class GainDesign:
    v_w: float
    eta: float
    gains: ControlGains
    m_p: float              # pu droop (inf when no steady-state response)
    k_wr: float
    k_b: float
    omega_del: float
    beta_del: float
    omega_mpp: float
    status: str             # "ok" | "no-droop" | "infeasible"


def droop_coefficient(k_theta_gsc: float, k_theta_msc: float,
                      k_wr: float, k_b: float, k_p: float) -> float:
    den = k_theta_msc * (k_wr + k_b * k_p)
    if den <= 0:
        raise ZeroStiffnessError("no steady-state power response (zero stiffness)")
    return k_theta_gsc / den


def max_gsc_gain(spec: DesignSpec) -> float:
    return spec.d_omega_max / spec.d_v_max


def max_msc_gain(spec: DesignSpec, k_theta_gsc: float, omega_del: float,
                 omega_mpp: float) -> float:
    head = omega_del - omega_mpp
    if head <= 1e-9:
        return spec.msc_floor
    return k_theta_gsc * head / spec.d_omega_max


def max_pitch_gain(spec: DesignSpec, k_theta_gsc: float, k_theta_msc: float,
                   beta_del: float) -> float:
    if k_theta_msc <= 0:
        raise ValueError("k_theta_msc must be positive")
    if beta_del <= 1e-12:
        return 0.0
    return (k_theta_gsc / k_theta_msc) * beta_del / spec.d_omega_max


def design_gains(params: TurbineParams, surface: CpSurface, v_w: float,
                 eta: float, spec: DesignSpec = DesignSpec()) -> GainDesign:
    """Largest-gain selection chain for one operating point."""
    pt = deload_point(params, surface, v_w, eta)
    lam_mpp, _ = find_mpp(surface)
    omega_mpp = lam_mpp * v_w / (params.R * params.omega_nom)
    ktg = max_gsc_gain(spec)
    ktm = max_msc_gain(spec, ktg, pt.omega_del, omega_mpp)
    k_p = max_pitch_gain(spec, ktg, ktm, pt.beta_del)
    k_wr, k_b = power_sensitivities(params, surface, v_w, pt.omega_del,
                                    pt.beta_del)
    status = "ok"
    try:
        m_p = droop_coefficient(ktg, ktm, k_wr, k_b, k_p)
    except ZeroStiffnessError:
        m_p = math.inf
        status = "no-droop"
    if spec.target_droop is not None and m_p > spec.target_droop:
        status = "infeasible"
    kdg = spec.k_d_gsc
    gains = ControlGains(
        gsc=ConverterGains(k_theta=ktg, k_d=kdg, t_dc=spec.t_dc,
                           k_q=spec.k_q_gsc),
        msc=ConverterGains(k_theta=ktm, k_d=kdg * ktm / ktg, t_dc=spec.t_dc,
                           k_q=spec.k_q_msc),
        pitch=PitchGains(k_p=k_p, beta_del=pt.beta_del),
        omega_del=pt.omega_del)
    return GainDesign(v_w=v_w, eta=eta, gains=gains, m_p=m_p, k_wr=k_wr,
                      k_b=k_b, omega_del=pt.omega_del, beta_del=pt.beta_del,
                      omega_mpp=omega_mpp, status=status)


def mppt_gains(params: TurbineParams, surface: CpSurface, v_w: float,
               spec: DesignSpec = DesignSpec()) -> GainDesign:
    """MPPT fallback gain set (eta = 1): matched converter gains, no pitch droop."""
    from .curtailment import solve_pitch_deload  # local to avoid cycle at import
    lam_mpp, cp_max = find_mpp(surface)
    omega_mpp = min(lam_mpp * v_w / (params.R * params.omega_nom),
                    params.omega_max)
    k3 = params.swept_k * v_w ** 3
    beta = 0.0
    if cp_max * k3 > params.P_rated:
        lam_cap = params.R * params.omega_max * params.omega_nom / v_w
        beta = solve_pitch_deload(surface, lam_cap, 1.0,
                                  params.P_rated / k3)
    ktg = max_gsc_gain(spec)
    kdg = spec.k_d_gsc
    gains = ControlGains(
        gsc=ConverterGains(k_theta=ktg, k_d=kdg, t_dc=spec.t_dc,
                           k_q=spec.k_q_gsc),
        msc=ConverterGains(k_theta=ktg, k_d=kdg, t_dc=spec.t_dc,
                           k_q=spec.k_q_msc),
        pitch=PitchGains(k_p=0.0, beta_del=beta),
        omega_del=omega_mpp)
    return GainDesign(v_w=v_w, eta=1.0, gains=gains, m_p=math.inf, k_wr=0.0,
                      k_b=0.0, omega_del=omega_mpp, beta_del=beta,
                      omega_mpp=omega_mpp, status="no-droop")


def droop_map(params: TurbineParams, surface: CpSurface, v_grid, eta_grid,
              spec: DesignSpec = DesignSpec()):
    """Matrix of smallest achievable droop; rows follow v_grid, cols eta_grid."""
    v_grid = np.asarray(v_grid, dtype=float)
    eta_grid = np.asarray(eta_grid, dtype=float)
    m = np.full((v_grid.size, eta_grid.size), np.inf)
    status = np.empty((v_grid.size, eta_grid.size), dtype=object)
    for i, v in enumerate(v_grid):
        for j, e in enumerate(eta_grid):
            if e >= 1.0:
                status[i, j] = "no-droop"
                continue
            d = design_gains(params, surface, float(v), float(e), spec)
            m[i, j] = d.m_p
            status[i, j] = d.status
    return m, status


def droop_map_to_csv(v_grid, eta_grid, m, status) -> str:
    buf = io.StringIO()
    buf.write("v_w,eta,m_p,status\n")
    for i, v in enumerate(v_grid):
        for j, e in enumerate(eta_grid):
            mp = m[i, j]
            mp_s = "inf" if math.isinf(mp) else f"{mp:.17g}"
            buf.write(f"{v:.17g},{e:.17g},{mp_s},{status[i, j]}\n")
    return buf.getvalue()
