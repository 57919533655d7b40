# cython: boundscheck=False, wraparound=False, cdivision=True, language_level=3
"""Compiled kernel: closed-loop derivative and RK4 integrator.

Mirrors _ode_py exactly (same operation order) so the two backends agree
to machine precision.
"""
import numpy as np

cimport numpy as cnp
from libc.math cimport exp, fabs, pow, sin

cnp.import_array()

BACKEND = "cython"

cdef int N = 13
cdef double BETZ = 16.0 / 27.0

# parameter indices (keep in sync with layout.py)
cdef enum:
    P_JG, P_TG, P_KG, P_BG, P_BM, P_JWT, P_CDC, P_TDC, P_KDG, P_KTG, \
    P_KDM, P_KTM, P_OMDEL, P_BETADEL, P_KP, P_TSERVO, P_RATE, P_KPLIM, \
    P_KILIM, P_PMAX, P_OMMAX, P_W0, P_VDCS, P_PG0, P_PCONST, P_PSCALE, \
    P_LAMC, P_CP0
cdef int P_CPMAX = 41
cdef int P_BETAMIN = 42
cdef int P_BETAMAX = 43


cdef inline double _cp(double* p, double lam, double beta) noexcept nogil:
    cdef double w = p[P_CP0]
    cdef double D = p[P_CP0 + 1]
    cdef double E = p[P_CP0 + 2]
    cdef double U = p[P_CP0 + 3]
    cdef double q = p[P_CP0 + 4]
    cdef double lam0 = p[P_CP0 + 5]
    cdef double a1 = p[P_CP0 + 6]
    cdef double a2 = p[P_CP0 + 7]
    cdef double a3 = p[P_CP0 + 8]
    cdef double a4 = p[P_CP0 + 9]
    cdef double L = p[P_CP0 + 10]
    cdef double bb = p[P_CP0 + 11]
    cdef double p1 = p[P_CP0 + 12]
    cdef double p2 = p[P_CP0 + 13]
    cdef double r = beta / p2
    cdef double b2 = beta * beta
    cdef double b3 = b2 * beta
    cdef double b4 = b3 * beta
    cdef double lm = lam0 + p1 * beta * exp(-(r * r)) \
        - L * (1.0 - exp(-beta / bb))
    cdef double u = (lam - lm) / w
    cdef double s = u * u
    cdef double g = (1.0 - D * s / (1.0 + s) - E * s * s / (1.0 + s * s)) \
        * exp(-pow(fabs(u / U), q))
    cdef double h = exp(-(a1 * beta + a2 * b2 + a3 * b3 + a4 * b4))
    cdef double v = p[P_CPMAX] * h * g
    if v < 0.0:
        return 0.0
    return v if v < BETZ else BETZ


cdef inline double _load(double t, double base, double* ev_t, double* ev_dp,
                         int n_ev) noexcept nogil:
    cdef double pl = base
    cdef int k
    for k in range(n_ev):
        if t >= ev_t[k]:
            pl += ev_dp[k]
    return pl


cdef void _deriv(double* x, double t, double* p, int mode, double base,
                 double* ev_t, double* ev_dp, int n_ev, double* out) noexcept nogil:
    cdef double pl = _load(t, base, ev_t, ev_dp, n_ev)
    cdef double om_g = x[2]
    cdef double p_g = x[3]
    cdef int i
    if mode == 0:
        for i in range(N):
            out[i] = 0.0
        out[1] = om_g - 1.0
        out[2] = (p_g + p[P_PCONST] - pl) / (p[P_JG] * om_g)
        out[3] = (-(p_g - p[P_PG0]) - p[P_KG] * (om_g - 1.0)) / p[P_TG]
        return
    cdef double th_gsc = x[0]
    cdef double th_g = x[1]
    cdef double vdc = x[4]
    cdef double th_msc = x[5]
    cdef double th_r = x[6]
    cdef double om_r = x[7]
    cdef double xg = x[8]
    cdef double xm = x[9]
    cdef double beta = x[10]
    cdef double isp = x[11]
    cdef double ipw = x[12]
    cdef double tdc = p[P_TDC]
    cdef double u = vdc - p[P_VDCS]
    cdef double yg = (p[P_KTG] - p[P_KDG] / tdc) * xg + (p[P_KDG] / tdc) * u
    cdef double ym = (p[P_KTM] - p[P_KDM] / tdc) * xm + (p[P_KDM] / tdc) * u
    cdef double om_gsc = p[P_W0] + yg
    cdef double om_msc = p[P_OMDEL] + ym
    cdef double p_pmsg = p[P_BM] * sin(th_r - th_msc)
    cdef double p_gsc = p[P_BG] * sin(th_gsc - th_g)
    cdef double p_wt = p[P_PSCALE] * _cp(p, p[P_LAMC] * om_r, beta)
    cdef double esp = om_r - p[P_OMMAX]
    cdef double usp = p[P_KPLIM] * esp + isp
    cdef double disp = p[P_KILIM] * esp
    if usp <= 0.0:
        usp = 0.0
        if esp < 0.0:
            disp = p[P_KILIM] * esp if isp > 0.0 else 0.0
    cdef double epw = p_pmsg - p[P_PMAX]
    cdef double upw = p[P_KPLIM] * epw + ipw
    cdef double dipw = p[P_KILIM] * epw
    if upw <= 0.0:
        upw = 0.0
        if epw < 0.0:
            dipw = p[P_KILIM] * epw if ipw > 0.0 else 0.0
    cdef double bref = p[P_BETADEL] + p[P_KP] * (om_r - p[P_OMDEL]) + usp + upw
    if bref < p[P_BETAMIN]:
        bref = p[P_BETAMIN]
    elif bref > p[P_BETAMAX]:
        bref = p[P_BETAMAX]
    cdef double dbeta = (bref - beta) / p[P_TSERVO]
    if dbeta > p[P_RATE]:
        dbeta = p[P_RATE]
    elif dbeta < -p[P_RATE]:
        dbeta = -p[P_RATE]
    if beta <= p[P_BETAMIN] and dbeta < 0.0:
        dbeta = 0.0
    if beta >= p[P_BETAMAX] and dbeta > 0.0:
        dbeta = 0.0
    out[0] = om_gsc - 1.0
    out[1] = om_g - 1.0
    out[2] = (p_g + p_gsc - pl) / (p[P_JG] * om_g)
    out[3] = (-(p_g - p[P_PG0]) - p[P_KG] * (om_g - 1.0)) / p[P_TG]
    out[4] = (p_pmsg - p_gsc) / (p[P_CDC] * vdc)
    out[5] = om_msc - p[P_OMDEL]
    out[6] = om_r - p[P_OMDEL]
    out[7] = (p_wt - p_pmsg) / (p[P_JWT] * om_r)
    out[8] = (u - xg) / tdc
    out[9] = (u - xm) / tdc
    out[10] = dbeta
    out[11] = disp
    out[12] = dipw


def derivative(x, t, params, mode, base_load, ev_t=(), ev_dp=()):
    """d state/dt for the 13-state closed loop (numpy array out)."""
    cdef cnp.ndarray[cnp.float64_t, ndim=1] xa = \
        np.ascontiguousarray(x, dtype=np.float64)
    cdef cnp.ndarray[cnp.float64_t, ndim=1] pa = \
        np.ascontiguousarray(params, dtype=np.float64)
    cdef cnp.ndarray[cnp.float64_t, ndim=1] eta = \
        np.ascontiguousarray(ev_t, dtype=np.float64)
    cdef cnp.ndarray[cnp.float64_t, ndim=1] edpa = \
        np.ascontiguousarray(ev_dp, dtype=np.float64)
    cdef cnp.ndarray[cnp.float64_t, ndim=1] out = np.empty(N, dtype=np.float64)
    cdef double* evt = <double*> eta.data if eta.shape[0] else NULL
    cdef double* evd = <double*> edpa.data if edpa.shape[0] else NULL
    _deriv(<double*> xa.data, t, <double*> pa.data, mode, base_load,
           evt, evd, eta.shape[0], <double*> out.data)
    return out


def simulate(x0, params, mode, dt, n_steps, stride, base_load, ev_t=(), ev_dp=()):
    """Fixed-step RK4 over n_steps; records every `stride` steps (plus t=0).

    Returns an array of shape (n_samples, 1 + N) with time in col 0.
    Raises FloatingPointError on divergence (any |state| > 1e6).
    """
    cdef cnp.ndarray[cnp.float64_t, ndim=1] xa = \
        np.ascontiguousarray(x0, dtype=np.float64).copy()
    cdef cnp.ndarray[cnp.float64_t, ndim=1] pa = \
        np.ascontiguousarray(params, dtype=np.float64)
    cdef cnp.ndarray[cnp.float64_t, ndim=1] eta = \
        np.ascontiguousarray(ev_t, dtype=np.float64)
    cdef cnp.ndarray[cnp.float64_t, ndim=1] edpa = \
        np.ascontiguousarray(ev_dp, dtype=np.float64)
    cdef int n_ev = eta.shape[0]
    cdef double* evt = <double*> eta.data if n_ev else NULL
    cdef double* evd = <double*> edpa.data if n_ev else NULL
    cdef int n_samp = 1 + n_steps // stride
    cdef cnp.ndarray[cnp.float64_t, ndim=2] out = \
        np.empty((n_samp, 1 + N), dtype=np.float64)
    cdef double* x = <double*> xa.data
    cdef double* p = <double*> pa.data
    cdef double k1[13]
    cdef double k2[13]
    cdef double k3[13]
    cdef double k4[13]
    cdef double xs[13]
    cdef int i, j, row = 1
    cdef int ns = n_steps
    cdef int st = stride
    cdef int md = mode
    cdef double h = dt
    cdef double bl = base_load
    cdef double t0
    cdef int bad = -1
    cdef double bad_t = 0.0
    out[0, 0] = 0.0
    for j in range(N):
        out[0, 1 + j] = x[j]
    with nogil:
        for i in range(ns):
            t0 = i * h
            _deriv(x, t0, p, md, bl, evt, evd, n_ev, k1)
            for j in range(N):
                xs[j] = x[j] + 0.5 * h * k1[j]
            _deriv(xs, t0 + 0.5 * h, p, md, bl, evt, evd, n_ev, k2)
            for j in range(N):
                xs[j] = x[j] + 0.5 * h * k2[j]
            _deriv(xs, t0 + 0.5 * h, p, md, bl, evt, evd, n_ev, k3)
            for j in range(N):
                xs[j] = x[j] + h * k3[j]
            _deriv(xs, t0 + h, p, md, bl, evt, evd, n_ev, k4)
            for j in range(N):
                x[j] = x[j] + h / 6.0 * (k1[j] + 2.0 * k2[j] + 2.0 * k3[j] + k4[j])
                if not fabs(x[j]) <= 1e6:  # also catches NaN
                    bad = j
                    bad_t = t0 + h
                    break
            if bad >= 0:
                break
            if (i + 1) % st == 0:
                out[row, 0] = (i + 1) * h
                for j in range(N):
                    out[row, 1 + j] = x[j]
                row += 1
    if bad >= 0:
        raise FloatingPointError(f"state {bad} diverged at t={bad_t:.6f}")
    return np.asarray(out[:row])
