"""Aerodynamic power-coefficient surface, mechanical power, and sensitivities."""
from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

BETZ = 16.0 / 27.0

# Generic exponential Cp family, common in the turbine literature.
GENERIC_COEFFS = (0.5176, 116.0, 0.4, 5.0, 21.0, 0.0068)

# Calibrated surface: Cp = cpmax * h(beta) * g(u) with
#   u      = (lambda - lam_ridge(beta)) / w
#   g(u)   = (1 - D u^2/(1+u^2) - E u^4/(1+u^4)) * exp(-|u/U|^q)
#   h(beta)= exp(-(a1 b + a2 b^2 + a3 b^3 + a4 b^4))
#   lam_ridge(beta) = lam0 + p1 b exp(-(b/p2)^2) - L (1 - exp(-b/bb))
# The coefficients were fit numerically so that the deloading points,
# gain-design chain, and steady-state droop of the default study system
# are mutually consistent (see README).
CALIBRATED_COEFFS = (
    1.816604532190e+00,   # w
    5.403229211671e-02,   # D
    1.094872245521e-02,   # E
    7.723725501470e+00,   # U
    2.000245242771e+00,   # q
    9.219542609547e+00,   # lam0
    1.453042926412e-05,   # a1
    2.187405083668e-02,   # a2
    -4.456151661055e-03,  # a3
    3.421795922745e-04,   # a4
    5.997991057029e+00,   # L
    3.442179882123e+00,   # bb
    1.576175390162e+00,   # p1
    1.080221118015e+01,   # p2
)
CALIBRATED_CPMAX = 0.4622678296929199


class AeroDomainError(ValueError):
    pass


@dataclass(frozen=True)
class CpSurface:
    """Power-coefficient surface Cp(lambda, beta)."""

    variant: str = "calibrated"  # "calibrated" | "generic" | "tabulated"
    coeffs: tuple = CALIBRATED_COEFFS
    cpmax_scale: float = CALIBRATED_CPMAX
    # tabulated variant
    lam_grid: np.ndarray | None = None
    beta_grid: np.ndarray | None = None
    cp_grid: np.ndarray | None = None

    @staticmethod
    def generic(coeffs: tuple = GENERIC_COEFFS) -> "CpSurface":
        return CpSurface(variant="generic", coeffs=coeffs)

    @staticmethod
    def tabulated(lam_grid, beta_grid, cp_grid) -> "CpSurface":
        lam_grid = np.asarray(lam_grid, dtype=float)
        beta_grid = np.asarray(beta_grid, dtype=float)
        cp_grid = np.asarray(cp_grid, dtype=float)
        if np.any(np.diff(lam_grid) <= 0) or np.any(np.diff(beta_grid) <= 0):
            raise AeroDomainError("table axes must be strictly increasing")
        if cp_grid.shape != (lam_grid.size, beta_grid.size):
            raise AeroDomainError("cp grid shape mismatch")
        return CpSurface(variant="tabulated", lam_grid=lam_grid,
                         beta_grid=beta_grid, cp_grid=cp_grid)

    @staticmethod
    def from_csv(path) -> "CpSurface":
        """Read a tabulated surface (header ``lambda,beta_deg,cp``, lambda-outer)."""
        raw = np.genfromtxt(path, delimiter=",", names=True)
        lam = np.unique(raw["lambda"])
        beta = np.unique(raw["beta_deg"])
        cp_grid = np.full((lam.size, beta.size), np.nan)
        li = np.searchsorted(lam, raw["lambda"])
        bi = np.searchsorted(beta, raw["beta_deg"])
        cp_grid[li, bi] = raw["cp"]
        if np.any(np.isnan(cp_grid)):
            raise AeroDomainError("incomplete cp table")
        return CpSurface.tabulated(lam, beta, cp_grid)


@dataclass(frozen=True)
class TurbineParams:
    rho: float = 1.225          # kg/m^3
    R: float = 63.0             # m
    J_wt: float = 35.328e6      # kg m^2, one turbine (rotor+generator, lumped)
    omega_nom: float = 1.37     # rad/s mech, per-unit base for omega_r
    omega_max: float = 1.2      # pu
    P_rated: float = 5e6        # W, one turbine
    v_rated: float = 11.23      # m/s
    n_agg: int = 10             # aggregated turbine count

    def __post_init__(self):
        for name in ("rho", "R", "J_wt", "omega_nom", "P_rated", "v_rated"):
            if getattr(self, name) <= 0:
                raise ValueError(f"{name} must be positive")
        if self.n_agg < 1:
            raise ValueError("n_agg must be >= 1")

    @property
    def swept_k(self) -> float:
        """0.5*rho*pi*R^2, the swept-area factor of the power equation."""
        return 0.5 * self.rho * math.pi * self.R ** 2


def _cp_generic(lam: float, beta: float, c) -> float:
    c1, c2, c3, c4, c5, c6 = c
    denom = 1.0 / (lam + 0.08 * beta) - 0.035 / (beta ** 3 + 1.0)
    lam_i = 1.0 / max(denom, 1e-9)
    return c1 * (c2 / lam_i - c3 * beta - c4) * math.exp(-c5 / lam_i) + c6 * lam


def _cp_calibrated(lam: float, beta: float, c, cpmax: float) -> float:
    w, D, E, U, q, lam0, a1, a2, a3, a4, L, bb, p1, p2 = c
    lr = lam0 + p1 * beta * math.exp(-(beta / p2) ** 2) - L * (1.0 - math.exp(-beta / bb))
    u = (lam - lr) / w
    s = u * u
    g = (1.0 - D * s / (1.0 + s) - E * s * s / (1.0 + s * s)) * math.exp(-abs(u / U) ** q)
    h = math.exp(-(a1 * beta + a2 * beta ** 2 + a3 * beta ** 3 + a4 * beta ** 4))
    return cpmax * h * g


def _cp_tabulated(lam: float, beta: float, s: CpSurface) -> float:
    lg, bg, cg = s.lam_grid, s.beta_grid, s.cp_grid
    if not (lg[0] <= lam <= lg[-1]) or not (bg[0] <= beta <= bg[-1]):
        raise AeroDomainError(f"({lam}, {beta}) outside table domain")
    i = min(int(np.searchsorted(lg, lam, side="right")) - 1, lg.size - 2)
    j = min(int(np.searchsorted(bg, beta, side="right")) - 1, bg.size - 2)
    i = max(i, 0)
    j = max(j, 0)
    tx = (lam - lg[i]) / (lg[i + 1] - lg[i])
    ty = (beta - bg[j]) / (bg[j + 1] - bg[j])
    return float((1 - tx) * (1 - ty) * cg[i, j] + tx * (1 - ty) * cg[i + 1, j]
                 + (1 - tx) * ty * cg[i, j + 1] + tx * ty * cg[i + 1, j + 1])


def cp(surface: CpSurface, lam: float, beta: float) -> float:
    """Cp(lambda, beta), clamped to [0, Betz limit]."""
    if lam <= 0:
        raise AeroDomainError("lambda must be positive")
    if surface.variant == "generic":
        v = _cp_generic(lam, beta, surface.coeffs)
    elif surface.variant == "calibrated":
        v = _cp_calibrated(lam, beta, surface.coeffs, surface.cpmax_scale)
    elif surface.variant == "tabulated":
        v = _cp_tabulated(lam, beta, surface)
    else:
        raise AeroDomainError(f"unknown surface variant {surface.variant!r}")
    return min(max(v, 0.0), BETZ)


def cp_partials(surface: CpSurface, lam: float, beta: float) -> tuple[float, float]:
    """(dCp/dlambda, dCp/dbeta).

    Closed form for the analytic variants; central differences at grid
    scale for the tabulated variant.
    """
    if surface.variant == "calibrated":
        w, D, E, U, q, lam0, a1, a2, a3, a4, L, bb, p1, p2 = surface.coeffs
        eb = math.exp(-(beta / p2) ** 2)
        lr = lam0 + p1 * beta * eb - L * (1.0 - math.exp(-beta / bb))
        dlr = p1 * eb * (1.0 - 2.0 * beta * beta / (p2 * p2)) \
            - L * (-1.0 / bb) * math.exp(-beta / bb) * (-1.0)
        u = (lam - lr) / w
        s = u * u
        G = 1.0 - D * s / (1.0 + s) - E * s * s / (1.0 + s * s)
        dG = -D * 2.0 * u / (1.0 + s) ** 2 - E * 4.0 * s * u / (1.0 + s * s) ** 2
        au = abs(u / U)
        Eq = math.exp(-au ** q)
        dEq = 0.0 if u == 0.0 else -Eq * (q / U) * au ** (q - 1.0) * math.copysign(1.0, u)
        g = G * Eq
        dg = dG * Eq + G * dEq
        poly = a1 * beta + a2 * beta ** 2 + a3 * beta ** 3 + a4 * beta ** 4
        h = math.exp(-poly)
        dh = -h * (a1 + 2 * a2 * beta + 3 * a3 * beta ** 2 + 4 * a4 * beta ** 3)
        cpm = surface.cpmax_scale
        return cpm * h * dg / w, cpm * (dh * g + h * dg * (-dlr / w))
    if surface.variant == "generic":
        h = 1e-7
        dl = (cp(surface, lam + h, beta) - cp(surface, lam - h, beta)) / (2 * h)
        db = (cp(surface, lam, beta + h) - cp(surface, lam, max(beta - h, 0.0))) \
            / (h if beta - h < 0 else 2 * h)
        return dl, db
    hl = float(np.min(np.diff(surface.lam_grid))) * 0.5
    hb = float(np.min(np.diff(surface.beta_grid))) * 0.5
    dl = (cp(surface, lam + hl, beta) - cp(surface, lam - hl, beta)) / (2 * hl)
    db = (cp(surface, lam, beta + hb) - cp(surface, lam, beta - hb)) / (2 * hb)
    return dl, db


def tip_speed_ratio(R: float, omega_r: float, v_w: float) -> float:
    if v_w <= 0:
        raise AeroDomainError("v_w must be positive")
    return R * omega_r / v_w


def wind_power(params: TurbineParams, surface: CpSurface, v_w: float,
               omega_r: float, beta: float, cp_override: float | None = None) -> float:
    """Aggregated mechanical power in W for rotor speed omega_r (rad/s mech)."""
    if v_w <= 0 or omega_r <= 0:
        raise AeroDomainError("v_w and omega_r must be positive")
    c = cp_override if cp_override is not None \
        else cp(surface, tip_speed_ratio(params.R, omega_r, v_w), beta)
    return params.n_agg * params.swept_k * c * v_w ** 3


def find_mpp(surface: CpSurface, lam_lo: float = 2.0, lam_hi: float = 15.0) -> tuple[float, float]:
    """(lam_mpp, cp_max) of Cp(., 0): coarse grid scan + golden-section refine."""
    grid = np.arange(lam_lo, lam_hi, 1e-2)
    vals = np.array([cp(surface, l, 0.0) for l in grid])
    i = int(np.argmax(vals))
    if vals[i] - np.median(vals) < 1e-9:
        raise AeroDomainError("Cp(.,0) is flat; no distinct maximum")
    a = grid[max(i - 1, 0)]
    b = grid[min(i + 1, grid.size - 1)]
    invphi = (math.sqrt(5.0) - 1.0) / 2.0
    c_ = b - invphi * (b - a)
    d_ = a + invphi * (b - a)
    while b - a > 1e-9:
        if cp(surface, c_, 0.0) > cp(surface, d_, 0.0):
            b, d_ = d_, c_
            c_ = b - invphi * (b - a)
        else:
            a, c_ = c_, d_
            d_ = a + invphi * (b - a)
    lam_mpp = 0.5 * (a + b)
    return lam_mpp, cp(surface, lam_mpp, 0.0)


def power_sensitivities(params: TurbineParams, surface: CpSurface, v_w: float,
                        omega_del: float, beta_del: float,
                        method: str = "analytic") -> tuple[float, float]:
    """(K_omega_r, K_beta): negated sensitivities of per-unit P_wt at the
    operating point, in pu/pu-speed and pu/degree.

    K_omega_r = -dP/domega_r, K_beta = -dP/dbeta; both are >= 0 on the
    deloaded branch.  Values with |K_omega_r| < 1e-4, or small-negative
    above -1e-3 (numerical noise at the MPP), are reported as 0.
    """
    p_base = params.P_rated  # per-turbine pu

    def p_pu(om_pu: float, b: float) -> float:
        lam = tip_speed_ratio(params.R, om_pu * params.omega_nom, v_w)
        return params.swept_k * cp(surface, lam, b) * v_w ** 3 / p_base

    if method == "analytic" and surface.variant in ("calibrated", "generic"):
        lam = tip_speed_ratio(params.R, omega_del * params.omega_nom, v_w)
        dl, db = cp_partials(surface, lam, beta_del)
        scale = params.swept_k * v_w ** 3 / p_base
        k_wr = -scale * dl * (params.R * params.omega_nom / v_w)
        k_b = -scale * db
    else:
        h = 1e-4
        k_wr = -(p_pu(omega_del + h, beta_del) - p_pu(omega_del - h, beta_del)) / (2 * h)
        hb = 1e-3
        k_b = -(p_pu(omega_del, beta_del + hb) - p_pu(omega_del, beta_del - hb)) / (2 * hb)
    if abs(k_wr) < 1e-4 or -1e-3 < k_wr < 0.0:
        k_wr = 0.0
    return k_wr, k_b
