import math

import numpy as np
import pytest

from windgfm.harness import gains_for_scenario, Scenario
from windgfm.plant import (
    LoadProfile, Mode, NetworkParams, PlantError, SgParams, closed_loop_derivative,
    find_equilibrium, gsc_power, pmsg_power, rk4_step, simulate, step_rk4,
    wind_power_pu,
)
from windgfm._kernel.layout import P_BG, P_BM, P_CDC


def equilibrium(plant, surface, v_w=8.0, eta=0.9, mode=Mode.GFM_FR,
                load=LoadProfile()):
    sc = Scenario(mode=mode, v_w=v_w, eta=eta, load=load)
    design = gains_for_scenario(plant, surface, sc)
    return design, find_equilibrium(plant, design.gains, surface, v_w, load, mode)


def test_pmsg_power_example():
    assert pmsg_power(1.5, 0.1, 0.0) == pytest.approx(0.14975, abs=1e-5)


def test_gsc_power_two_line_example():
    # angle differences (0.1, -0.05) with b = (1, 2)
    p = gsc_power(((1.0, -0.1), (2.0, 0.05)), 0.0)
    assert p == pytest.approx(math.sin(0.1) - 2.0 * math.sin(0.05), abs=1e-12)
    assert p == pytest.approx(-0.00013, abs=5e-5)


def test_gsc_power_antisymmetry():
    lines = ((1.3, 0.2),)
    assert gsc_power(lines, 0.5) == pytest.approx(
        -gsc_power(((1.3, 0.5),), 0.2), abs=1e-15)


def test_gsc_power_requires_lines():
    with pytest.raises(ValueError):
        gsc_power((), 0.0)


def test_sg_per_unit_conversion():
    sg = SgParams()
    assert sg.j_g(50e6) == pytest.approx(2 * 4.0 * 210e6 / 50e6, abs=1e-12)
    assert sg.k_g(50e6) == pytest.approx((210e6 / 50e6) / 0.05, abs=1e-12)


def test_parameter_validation():
    with pytest.raises(ValueError):
        SgParams(h_g=0.0)
    with pytest.raises(ValueError):
        NetworkParams(b_g=-1.0)


def test_load_profile_steps():
    load = LoadProfile(base=2.0, events=((30.0, 0.4), (45.0, -0.1)))
    assert load.value(0.0) == 2.0
    assert load.value(30.0) == 2.4
    assert load.value(50.0) == pytest.approx(2.3)
    assert load.ev_times == (30.0, 45.0)
    assert load.ev_steps == (0.4, -0.1)


def test_rk4_linear_oracle():
    # x' = -x over t = 0.1 in one step: e^-0.1 to RK4 truncation accuracy
    x = rk4_step(lambda x, t: -x, np.array([1.0]), 0.0, 0.1)
    assert x[0] == pytest.approx(math.exp(-0.1), abs=1e-7)
    with pytest.raises(ValueError):
        rk4_step(lambda x, t: -x, np.array([1.0]), 0.0, 0.0)


def test_equilibrium_residual_is_tiny(plant, surface):
    for mode in (Mode.GFM_FR, Mode.GFM_MPPT, Mode.GFL_MPPT):
        _, (x0, p_arr, op) = equilibrium(plant, surface, mode=mode)
        pre = LoadProfile(base=2.0, events=())
        resid = closed_loop_derivative(x0, 0.0, p_arr, mode, pre)
        assert np.max(np.abs(resid)) < 1e-10
        assert x0[4] == 1.0 and x0[2] == 1.0


def test_equilibrium_angles_match_power(plant, surface):
    _, (x0, p_arr, op) = equilibrium(plant, surface)
    assert pmsg_power(p_arr[P_BM], x0[6], x0[5]) == pytest.approx(
        op.p_wt0, abs=1e-12)
    assert p_arr[P_BG] * math.sin(x0[0] - x0[1]) == pytest.approx(
        op.p_wt0, abs=1e-12)


def test_derivative_load_step_hits_sg_swing(plant, surface):
    _, (x0, p_arr, op) = equilibrium(plant, surface)
    stepped = LoadProfile(base=2.1, events=())
    d = closed_loop_derivative(x0, 0.0, p_arr, Mode.GFM_FR, stepped)
    j_g = plant.sg.j_g(plant.network.s_base)
    assert d[2] == pytest.approx(-0.1 / j_g, abs=1e-12)


def test_derivative_dc_power_balance_identity(plant, surface):
    # C_dc v dv/dt must equal P_pmsg - P_gsc at any state
    rng = np.random.default_rng(11)
    _, (x0, p_arr, op) = equilibrium(plant, surface)
    load = LoadProfile(base=2.0, events=())
    for _ in range(20):
        x = x0 + rng.uniform(-0.02, 0.02, size=13)
        d = closed_loop_derivative(x, 0.0, p_arr, Mode.GFM_FR, load)
        p_pm = p_arr[P_BM] * math.sin(x[6] - x[5])
        p_gs = p_arr[P_BG] * math.sin(x[0] - x[1])
        assert p_arr[P_CDC] * x[4] * d[4] == pytest.approx(p_pm - p_gs,
                                                           abs=1e-12)


def test_derivative_rejects_invalid_state(plant, surface):
    _, (x0, p_arr, op) = equilibrium(plant, surface)
    bad = x0.copy()
    bad[4] = -0.1
    with pytest.raises(PlantError):
        closed_loop_derivative(bad, 0.0, p_arr, Mode.GFM_FR, LoadProfile())


def test_no_disturbance_run_stays_at_equilibrium(plant, surface):
    _, (x0, p_arr, op) = equilibrium(plant, surface,
                                     load=LoadProfile(base=2.0, events=()))
    states = simulate(x0, p_arr, Mode.GFM_FR,
                      LoadProfile(base=2.0, events=()), 10.0, 5e-4)
    drift = np.max(np.abs(states[-1, 1:] - x0))
    assert drift < 1e-9


def test_step_rk4_matches_kernel_simulate(plant, surface):
    design, (x0, p_arr, op) = equilibrium(plant, surface)
    load = LoadProfile(base=2.0, events=((0.01, 0.4),))
    dt = 5e-4
    x = x0.copy()
    for i in range(40):
        x = step_rk4(x, i * dt, dt, p_arr, Mode.GFM_FR, load)
    states = simulate(x0, p_arr, Mode.GFM_FR, load, 40 * dt, dt, sample_dt=dt)
    np.testing.assert_allclose(states[-1, 1:], x, rtol=0, atol=1e-13)


def test_event_off_grid_rejected(plant, surface):
    _, (x0, p_arr, op) = equilibrium(plant, surface)
    load = LoadProfile(base=2.0, events=((30.00031, 0.4),))
    with pytest.raises(PlantError):
        simulate(x0, p_arr, Mode.GFM_FR, load, 60.0, 5e-4)


def test_divergence_detected(plant, surface):
    _, (x0, p_arr, op) = equilibrium(plant, surface)
    # an unstable governor (negative time constant) blows up exponentially
    # once the load step perturbs the equilibrium
    from windgfm._kernel.layout import P_TG
    bad = p_arr.copy()
    bad[P_TG] = -0.01
    load = LoadProfile(base=2.0, events=((0.5, 0.4),))
    with pytest.raises(PlantError):
        simulate(x0, bad, Mode.GFM_FR, load, 20.0, 5e-4)


def test_gfl_mode_freezes_wt_states(plant, surface):
    _, (x0, p_arr, op) = equilibrium(plant, surface, eta=1.0,
                                     mode=Mode.GFL_MPPT)
    states = simulate(x0, p_arr, Mode.GFL_MPPT, LoadProfile(), 40.0, 5e-4)
    # WT-side states identical over the whole run; SG responds to the step
    for col in (1, 5, 6, 7, 8, 9, 10, 11, 12, 13):
        assert np.all(states[:, col] == states[0, col])
    assert states[-1, 3] < 1.0  # omega_g settles below nominal


def test_wind_power_pu_consistency(plant, surface):
    tb = plant.turbine
    p = wind_power_pu(tb, surface, 8.0, 1.1, 0.0)
    from windgfm.aero import wind_power
    expect = wind_power(tb, surface, 8.0, 1.1 * tb.omega_nom, 0.0) \
        / plant.network.s_base
    assert p == pytest.approx(expect, rel=1e-12)
