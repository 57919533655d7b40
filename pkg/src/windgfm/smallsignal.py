"""Six-state small-signal model, stability test, and LaSalle certificate."""
from __future__ import annotations

import json
import math
from dataclasses import dataclass

import numpy as np
from scipy.linalg import expm

from .aero import CpSurface, TurbineParams, cp, tip_speed_ratio
from .control import ControlGains
from .plant import NetworkParams, PlantParams

STATE_LABELS = ("rho_1", "rho_2", "omega_g", "omega_r", "v_dc", "p_g")


class SmallSignalError(ValueError):
    pass


@dataclass(frozen=True)
class SmallSignalModel:
    T: np.ndarray       # 6x6 diagonal
    A: np.ndarray       # 6x6
    E: np.ndarray       # disturbance injection (load step into omega_g row)
    labels: tuple
    # components for certificate construction
    b_g: float
    b_msc: float
    j_g: float          # J_g * omega_0
    j_wt: float         # J_wt * omega_del
    c_dc: float
    t_g: float
    k_g: float
    k_theta_gsc: float
    k_theta_msc: float
    k_d_gsc: float
    k_d_msc: float
    k_wt: float


@dataclass(frozen=True)
class LaSalleReport:
    M: np.ndarray
    V: np.ndarray
    max_eig_S: float        # largest eigenvalue of sym(M At + At' M)
    max_dev_S_plus_V: float  # elementwise |S + sym(V)| max
    m_positive_definite: bool

    @property
    def certified(self) -> bool:
        return self.m_positive_definite and self.max_eig_S <= 1e-9


def build_model(j_g: float, j_wt: float, c_dc: float, t_g: float, k_g: float,
                b_g: float, b_msc: float, k_theta_gsc: float, k_d_gsc: float,
                k_theta_msc: float, k_d_msc: float, k_wt: float,
                omega_0: float = 1.0, omega_del: float = 1.0) -> SmallSignalModel:
    """Assemble T x' = A x for x = (rho_1, rho_2, omega_g, omega_r, v_dc, p_g).

    rho_1 is the GSC-SG angle difference, rho_2 the MSC-rotor angle
    difference; k_wt is the aggregate torque stiffness K_omega_r + K_beta K_p.
    Assumes zero DC-filter lag and constant voltage magnitudes.
    """
    for name, v in (("j_g", j_g), ("j_wt", j_wt), ("c_dc", c_dc),
                    ("t_g", t_g), ("k_g", k_g), ("b_g", b_g),
                    ("b_msc", b_msc), ("k_theta_gsc", k_theta_gsc),
                    ("k_theta_msc", k_theta_msc)):
        if v <= 0:
            raise SmallSignalError(f"{name} must be positive")
    if k_d_gsc < 0 or k_d_msc < 0:
        raise SmallSignalError("derivative gains must be non-negative")
    T = np.diag([1.0, 1.0, j_g * omega_0, j_wt * omega_del, c_dc, t_g])
    k1 = k_d_gsc / c_dc
    k2 = k_d_msc / c_dc
    A = np.array([
        [-k1 * b_g, -k1 * b_msc, -1.0, 0.0, k_theta_gsc, 0.0],
        [-k2 * b_g, -k2 * b_msc, 0.0, -1.0, k_theta_msc, 0.0],
        [b_g, 0.0, 0.0, 0.0, 0.0, 1.0],
        [0.0, b_msc, 0.0, -k_wt, 0.0, 0.0],
        [-b_g, -b_msc, 0.0, 0.0, 0.0, 0.0],
        [0.0, 0.0, -k_g, 0.0, 0.0, -1.0]])
    E = np.array([0.0, 0.0, -1.0, 0.0, 0.0, 0.0])
    return SmallSignalModel(T=T, A=A, E=E, labels=STATE_LABELS,
                            b_g=b_g, b_msc=b_msc, j_g=j_g * omega_0,
                            j_wt=j_wt * omega_del, c_dc=c_dc, t_g=t_g, k_g=k_g,
                            k_theta_gsc=k_theta_gsc, k_theta_msc=k_theta_msc,
                            k_d_gsc=k_d_gsc, k_d_msc=k_d_msc, k_wt=k_wt)


def model_from_params(plant: PlantParams, gains: ControlGains,
                      k_wr: float, k_b: float) -> SmallSignalModel:
    nw = plant.network
    sg = plant.sg
    tb = plant.turbine
    k_wt = k_wr + k_b * gains.pitch.k_p
    return build_model(
        j_g=sg.j_g(nw.s_base),
        j_wt=tb.n_agg * tb.J_wt * tb.omega_nom ** 2 / nw.s_base,
        c_dc=nw.c_dc, t_g=sg.t_g, k_g=sg.k_g(nw.s_base),
        b_g=nw.b_g, b_msc=nw.b_msc,
        k_theta_gsc=gains.gsc.k_theta, k_d_gsc=gains.gsc.k_d,
        k_theta_msc=gains.msc.k_theta, k_d_msc=gains.msc.k_d,
        k_wt=k_wt, omega_0=gains.omega_0, omega_del=gains.omega_del)


def system_matrix(model: SmallSignalModel) -> np.ndarray:
    return np.linalg.solve(model.T, model.A)


def stability_verdict(model: SmallSignalModel) -> tuple[np.ndarray, bool]:
    """(spectrum of T^-1 A, stable), stable iff max Re < -1e-9."""
    lam = np.linalg.eigvals(system_matrix(model))
    return lam, bool(lam.real.max() < -1e-9)


def theorem1_conditions(k_theta_gsc: float, k_d_gsc: float,
                        k_theta_msc: float, k_d_msc: float,
                        k_wr: float, k_b: float, k_p: float) -> bool:
    """Stiffness non-negativity plus matched derivative-to-proportional ratio."""
    if k_wr + k_b * k_p < 0:
        return False
    rg = k_d_gsc / k_theta_gsc
    rm = k_d_msc / k_theta_msc
    scale = max(abs(rg), abs(rm), 1e-30)
    return abs(rg - rm) / scale < 1e-9 or abs(rg - rm) < 1e-12


def lasalle_verify(model: SmallSignalModel) -> LaSalleReport:
    """Numeric certificate in x = (B rho, omega, v_dc, p_g) coordinates.

    M = 1/2 diag((K_theta B)^-1, K_theta^-1 J, C_dc, T_g/(k_theta_gsc k_g));
    S = sym(M At + At' M) should be negative semidefinite and equal -sym(V).
    """
    if not theorem1_conditions(model.k_theta_gsc, model.k_d_gsc,
                               model.k_theta_msc, model.k_d_msc,
                               model.k_wt, 0.0, 0.0):
        raise SmallSignalError("Theorem-1 conditions do not hold")
    S_tr = np.diag([model.b_g, model.b_msc, 1.0, 1.0, 1.0, 1.0])
    At = S_tr @ system_matrix(model) @ np.linalg.inv(S_tr)
    M = 0.5 * np.diag([
        1.0 / (model.k_theta_gsc * model.b_g),
        1.0 / (model.k_theta_msc * model.b_msc),
        model.j_g / model.k_theta_gsc,
        model.j_wt / model.k_theta_msc,
        model.c_dc,
        model.t_g / (model.k_theta_gsc * model.k_g)])
    S = M @ At + At.T @ M
    S = 0.5 * (S + S.T)
    V = np.zeros((6, 6))
    V[:2, :2] = model.k_d_gsc / (model.k_theta_gsc * model.c_dc)
    V[3, 3] = model.k_wt / model.k_theta_msc
    V[5, 5] = 1.0 / (model.k_theta_gsc * model.k_g)
    eigM = np.linalg.eigvalsh(M)
    return LaSalleReport(
        M=M, V=V,
        max_eig_S=float(np.linalg.eigvalsh(S).max()),
        max_dev_S_plus_V=float(np.abs(S + 0.5 * (V + V.T)).max()),
        m_positive_definite=bool(eigM.min() > 0))


def lasalle_function(model: SmallSignalModel, x6: np.ndarray) -> float:
    """V(x) = x' M x in certificate coordinates, for a model-coordinate state."""
    rep = lasalle_verify(model)
    S_tr = np.diag([model.b_g, model.b_msc, 1.0, 1.0, 1.0, 1.0])
    z = S_tr @ np.asarray(x6, dtype=float)
    return float(z @ rep.M @ z)


def linear_response(model: SmallSignalModel, d_p_l: float, horizon: float,
                    dt: float) -> tuple[np.ndarray, np.ndarray]:
    """Integrate T x' = A x + E dP_L from rest; returns (t, X)."""
    Asys = system_matrix(model)
    b = np.linalg.solve(model.T, model.E) * d_p_l
    n = int(round(horizon / dt))
    Phi = expm(Asys * dt)
    # exact step response of the affine system over one sample
    x_inf = np.linalg.solve(Asys, -b)
    t = np.arange(n + 1) * dt
    X = np.empty((n + 1, 6))
    x = np.zeros(6)
    for i in range(n + 1):
        X[i] = x
        x = x_inf + Phi @ (x - x_inf)
    return t, X


def steady_state(model: SmallSignalModel, d_p_l: float) -> np.ndarray:
    """Equilibrium of the disturbed linear system: solves A x = -E dP_L."""
    return np.linalg.solve(model.A, -model.E * d_p_l)


def reduced_rhs(model: SmallSignalModel, params: TurbineParams,
                surface: CpSurface, v_w: float, omega_del: float,
                beta_del: float, k_p: float):
    """Nonlinear reduced closed loop whose linearization at 0 is T^-1 A.

    Deviation coordinates; the sine nonlinearity is retained on both links
    and WT power enters through the full Cp surface with the proportional
    pitch law beta = beta_del + k_p * omega_r_dev (no DC-filter lag, no
    servo).
    """
    bg, bm = model.b_g, model.b_msc
    ktg, ktm = model.k_theta_gsc, model.k_theta_msc
    kdg, kdm = model.k_d_gsc, model.k_d_msc
    jg, jwt, cdc, tg, kg = model.j_g, model.j_wt, model.c_dc, model.t_g, model.k_g
    scale = params.swept_k * v_w ** 3 / params.P_rated

    def p_wt_dev(om_dev: float) -> float:
        om = (omega_del + om_dev) * params.omega_nom
        beta = max(beta_del + k_p * om_dev, 0.0)
        lam = tip_speed_ratio(params.R, om, v_w)
        base = tip_speed_ratio(params.R, omega_del * params.omega_nom, v_w)
        return scale * (cp(surface, lam, beta) - cp(surface, base, beta_del))

    def f(x: np.ndarray) -> np.ndarray:
        r1, r2, og, orr, v, pg = x
        p_gsc = bg * math.sin(r1)
        p_pm = -bm * math.sin(r2)
        dv = (p_pm - p_gsc) / cdc
        return np.array([
            ktg * v + kdg / cdc * (p_pm - p_gsc) - og,
            ktm * v + kdm / cdc * (p_pm - p_gsc) - orr,
            (p_gsc + pg) / jg,
            (p_wt_dev(orr) + bm * math.sin(r2)) / jwt,
            dv,
            (-kg * og - pg) / tg])

    return f


def numerical_jacobian(f, x0: np.ndarray, h: float = 1e-7) -> np.ndarray:
    """Richardson-extrapolated central differences (order h^4)."""
    x0 = np.asarray(x0, dtype=float)
    n = x0.size
    m = f(x0).size
    J = np.empty((m, n))
    for j in range(n):
        e = np.zeros(n)
        e[j] = 1.0
        d1 = (f(x0 + h * e) - f(x0 - h * e)) / (2 * h)
        d2 = (f(x0 + 2 * h * e) - f(x0 - 2 * h * e)) / (4 * h)
        J[:, j] = (4.0 * d1 - d2) / 3.0
    return J


def model_to_json(model: SmallSignalModel) -> str:
    lam, stable = stability_verdict(model)
    return json.dumps({
        "labels": list(model.labels),
        "T": model.T.tolist(),
        "A": model.A.tolist(),
        "eigenvalues": [[float(z.real), float(z.imag)] for z in lam],
        "stable": stable,
    }, indent=2)
