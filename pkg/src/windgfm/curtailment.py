"""Deloaded operating points: overspeed-first curtailment with pitch fallback."""
from __future__ import annotations

import io
from dataclasses import dataclass

import numpy as np

from .aero import CpSurface, TurbineParams, cp, find_mpp, tip_speed_ratio


class CurtailmentError(ValueError):
    pass


@dataclass(frozen=True)
class DeloadPoint:
    v_w: float          # m/s
    eta: float          # curtailment fraction in (0, 1]
    lam_del: float      # tip-speed ratio at the deloaded point
    omega_del: float    # pu of omega_nom
    beta_del: float     # degrees
    p_wt_del: float     # pu of P_rated (one turbine)


@dataclass(frozen=True)
class DeloadTable:
    v_grid: np.ndarray
    eta_grid: np.ndarray
    points: tuple  # row-major (v, eta) tuple of DeloadPoint


def _bisect(f, lo: float, hi: float, ftol: float = 1e-12, xtol: float = 1e-13) -> float:
    """Plain bisection; f(lo) and f(hi) must bracket a root."""
    flo, fhi = f(lo), f(hi)
    if flo == 0.0:
        return lo
    if fhi == 0.0:
        return hi
    if flo * fhi > 0:
        raise CurtailmentError("no sign change on bracket")
    for _ in range(200):
        mid = 0.5 * (lo + hi)
        fm = f(mid)
        if abs(fm) < ftol or hi - lo < xtol:
            return mid
        if flo * fm <= 0:
            hi, fhi = mid, fm
        else:
            lo, flo = mid, fm
    return 0.5 * (lo + hi)


def solve_speed_deload(surface: CpSurface, eta: float, lam_hi: float = 25.0) -> float:
    """lambda_del > lambda_mpp with Cp(lambda_del, 0) = eta * Cp_max."""
    if not 0.0 < eta <= 1.0:
        raise CurtailmentError("eta must be in (0, 1]")
    lam_mpp, cp_max = find_mpp(surface)
    if eta == 1.0:
        return lam_mpp
    target = eta * cp_max
    if cp(surface, lam_hi, 0.0) > target:
        raise CurtailmentError("curtailment unreachable by overspeed alone")
    return _bisect(lambda l: cp(surface, l, 0.0) - target, lam_mpp, lam_hi)


def solve_pitch_deload(surface: CpSurface, lam_capped: float, eta: float,
                       target_cp: float) -> float:
    """beta_del in [0, 30] with Cp(lam_capped, beta_del) = eta * target_cp."""
    goal = eta * target_cp
    if cp(surface, lam_capped, 0.0) <= goal:
        return 0.0
    if cp(surface, lam_capped, 30.0) > goal:
        raise CurtailmentError("target below reach even at beta = 30 deg")
    return _bisect(lambda b: cp(surface, lam_capped, b) - goal, 0.0, 30.0)


def deload_point(params: TurbineParams, surface: CpSurface, v_w: float,
                 eta: float) -> DeloadPoint:
    """Overspeed-first branch logic; pitch only once omega hits omega_max.

    Above rated wind the target power is clamped to eta * P_rated.
    """
    lam_mpp, cp_max = find_mpp(surface)
    k3 = params.swept_k * v_w ** 3
    p_avail = min(cp_max * k3, params.P_rated)
    target_cp = p_avail / k3                    # Cp equivalent of the clamped target
    lam_cap = tip_speed_ratio(params.R, params.omega_max * params.omega_nom, v_w)

    lam_del = None
    if target_cp <= cp_max:  # overspeed branch solvable only below the peak value
        try:
            lam_del = solve_speed_deload_target(surface, eta * target_cp, lam_mpp)
        except CurtailmentError:
            lam_del = None
    if lam_del is not None and lam_del <= lam_cap:
        om = lam_del * v_w / (params.R * params.omega_nom)
        beta = 0.0
    else:
        om = params.omega_max
        lam_del = lam_cap
        beta = solve_pitch_deload(surface, lam_cap, eta, target_cp)
    p_pu = k3 * cp(surface, lam_del, beta) / params.P_rated
    return DeloadPoint(v_w=v_w, eta=eta, lam_del=lam_del, omega_del=om,
                       beta_del=beta, p_wt_del=p_pu)


def solve_speed_deload_target(surface: CpSurface, target: float,
                              lam_mpp: float, lam_hi: float = 25.0) -> float:
    """Overspeed solve against an absolute Cp target (clamped-power variant)."""
    if target >= cp(surface, lam_mpp, 0.0):
        return lam_mpp
    if cp(surface, lam_hi, 0.0) > target:
        raise CurtailmentError("curtailment unreachable by overspeed alone")
    return _bisect(lambda l: cp(surface, l, 0.0) - target, lam_mpp, lam_hi)


def build_table(params: TurbineParams, surface: CpSurface,
                v_grid=None, eta_grid=None) -> DeloadTable:
    if v_grid is None:
        v_grid = np.arange(4.0, 14.01, 0.5)
    if eta_grid is None:
        eta_grid = np.arange(0.70, 1.001, 0.05)
    v_grid = np.asarray(v_grid, dtype=float)
    eta_grid = np.asarray(eta_grid, dtype=float)
    pts = tuple(deload_point(params, surface, v, e)
                for v in v_grid for e in eta_grid)
    return DeloadTable(v_grid=v_grid, eta_grid=eta_grid, points=pts)


def lookup(table: DeloadTable, v_w: float, eta: float) -> DeloadPoint:
    """Bilinear interpolation of omega_del and beta_del."""
    vg, eg = table.v_grid, table.eta_grid
    if not (vg[0] <= v_w <= vg[-1]) or not (eg[0] <= eta <= eg[-1]):
        raise CurtailmentError("query outside table grid")
    i = min(int(np.searchsorted(vg, v_w, side="right")) - 1, vg.size - 2)
    j = min(int(np.searchsorted(eg, eta, side="right")) - 1, eg.size - 2)
    i, j = max(i, 0), max(j, 0)
    tx = (v_w - vg[i]) / (vg[i + 1] - vg[i])
    ty = (eta - eg[j]) / (eg[j + 1] - eg[j])

    def cell(ii, jj):
        return table.points[ii * eg.size + jj]

    def blend(attr):
        return ((1 - tx) * (1 - ty) * getattr(cell(i, j), attr)
                + tx * (1 - ty) * getattr(cell(i + 1, j), attr)
                + (1 - tx) * ty * getattr(cell(i, j + 1), attr)
                + tx * ty * getattr(cell(i + 1, j + 1), attr))

    return DeloadPoint(v_w=v_w, eta=eta, lam_del=blend("lam_del"),
                       omega_del=blend("omega_del"), beta_del=blend("beta_del"),
                       p_wt_del=blend("p_wt_del"))


def table_to_csv(table: DeloadTable) -> str:
    buf = io.StringIO()
    buf.write("v_w,eta,lambda_del,omega_del_pu,beta_del_deg\n")
    for p in table.points:
        buf.write(f"{p.v_w:.17g},{p.eta:.17g},{p.lam_del:.17g},"
                  f"{p.omega_del:.17g},{p.beta_del:.17g}\n")
    return buf.getvalue()
