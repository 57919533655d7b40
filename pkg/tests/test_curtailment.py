import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from windgfm.aero import CpSurface, TurbineParams, cp, find_mpp
from windgfm.curtailment import (
    CurtailmentError, build_table, deload_point, lookup, solve_pitch_deload,
    solve_speed_deload, table_to_csv,
)


def test_full_power_returns_mpp(surface):
    lam_mpp, _ = find_mpp(surface)
    assert solve_speed_deload(surface, 1.0) == lam_mpp


def test_speed_deload_residual(surface):
    lam_mpp, cp_max = find_mpp(surface)
    for eta in (0.7, 0.8, 0.9, 0.95):
        lam = solve_speed_deload(surface, eta)
        assert lam > lam_mpp
        assert cp(surface, lam, 0.0) == pytest.approx(eta * cp_max, abs=1e-9)


def test_speed_deload_rejects_bad_eta(surface):
    with pytest.raises(CurtailmentError):
        solve_speed_deload(surface, 0.0)
    with pytest.raises(CurtailmentError):
        solve_speed_deload(surface, 1.2)


def test_pitch_deload_residual(surface):
    lam_mpp, cp_max = find_mpp(surface)
    lam_cap = 7.0
    target = cp(surface, lam_cap, 0.0)
    beta = solve_pitch_deload(surface, lam_cap, 0.9, target)
    assert 0.0 < beta < 30.0
    assert cp(surface, lam_cap, beta) == pytest.approx(0.9 * target, abs=1e-9)


def test_pitch_deload_zero_when_already_below(surface):
    # Cp at the capped tip-speed ratio already at/below the goal -> no pitch
    already = cp(surface, 20.0, 0.0)
    assert solve_pitch_deload(surface, 20.0, 1.0, already + 0.01) == 0.0


def test_deload_point_overspeed_branch(turbine, surface):
    pt = deload_point(turbine, surface, 8.0, 0.9)
    assert pt.beta_del == 0.0
    assert pt.omega_del == pytest.approx(1.16, rel=0.05)
    assert pt.omega_del <= turbine.omega_max + 1e-12


def test_deload_point_pitch_branch_10ms(turbine, surface):
    pt = deload_point(turbine, surface, 10.0, 0.9)
    assert pt.omega_del == pytest.approx(turbine.omega_max, abs=1e-12)
    assert pt.beta_del == pytest.approx(3.0, abs=1.5)


def test_deload_point_pitch_branch_12ms(turbine, surface):
    pt = deload_point(turbine, surface, 12.0, 0.9)
    assert pt.omega_del == pytest.approx(turbine.omega_max, abs=1e-12)
    assert pt.beta_del == pytest.approx(5.4, abs=1.5)


def test_deload_point_power_matches_target(turbine, surface):
    _, cp_max = find_mpp(surface)
    for v_w in (6.0, 8.0, 10.0, 12.0):
        for eta in (0.8, 0.9):
            pt = deload_point(turbine, surface, v_w, eta)
            k3 = turbine.swept_k * v_w ** 3
            p_target = eta * min(cp_max * k3, turbine.P_rated) / turbine.P_rated
            assert pt.p_wt_del == pytest.approx(p_target, rel=5e-3)


@given(v_w=st.floats(5.0, 13.0), e1=st.floats(0.72, 0.88))
@settings(max_examples=40, deadline=None)
def test_deload_monotone_in_eta(v_w, e1):
    turbine = TurbineParams()
    surface = CpSurface()
    e2 = e1 + 0.1
    p1 = deload_point(turbine, surface, v_w, e1)
    p2 = deload_point(turbine, surface, v_w, e2)
    # deeper curtailment -> at least as much overspeed and at least as much pitch
    assert p1.omega_del >= p2.omega_del - 1e-9
    assert p1.beta_del >= p2.beta_del - 1e-9
    assert p1.p_wt_del <= p2.p_wt_del + 1e-9


def test_rotor_speed_never_exceeds_limit(turbine, surface):
    for v_w in np.arange(4.0, 14.01, 1.0):
        for eta in (0.7, 0.85, 1.0):
            pt = deload_point(turbine, surface, v_w, eta)
            assert pt.omega_del <= turbine.omega_max + 1e-12
            assert 0.0 <= pt.beta_del <= 30.0


def test_build_table_shape_and_lookup_identity(turbine, surface):
    v_g = np.array([6.0, 8.0, 10.0])
    e_g = np.array([0.8, 0.9, 1.0])
    table = build_table(turbine, surface, v_g, e_g)
    assert len(table.points) == 9
    # lookup at a node reproduces the node
    pt = lookup(table, 8.0, 0.9)
    ref = deload_point(turbine, surface, 8.0, 0.9)
    assert pt.omega_del == pytest.approx(ref.omega_del, abs=1e-12)
    assert pt.beta_del == pytest.approx(ref.beta_del, abs=1e-12)


def test_lookup_bilinear_midpoint(turbine, surface):
    v_g = np.array([8.0, 10.0])
    e_g = np.array([0.8, 0.9])
    table = build_table(turbine, surface, v_g, e_g)
    mid = lookup(table, 9.0, 0.85)
    expect = 0.25 * sum(p.omega_del for p in table.points)
    assert mid.omega_del == pytest.approx(expect, abs=1e-12)


def test_lookup_outside_grid_raises(turbine, surface):
    table = build_table(turbine, surface, [8.0, 10.0], [0.8, 0.9])
    with pytest.raises(CurtailmentError):
        lookup(table, 3.0, 0.85)
    with pytest.raises(CurtailmentError):
        lookup(table, 9.0, 0.5)


def test_table_csv_format(turbine, surface):
    table = build_table(turbine, surface, [8.0], [0.9])
    text = table_to_csv(table)
    lines = text.strip().split("\n")
    assert lines[0] == "v_w,eta,lambda_del,omega_del_pu,beta_del_deg"
    vals = [float(v) for v in lines[1].split(",")]
    assert vals[0] == 8.0 and vals[1] == 0.9
    pt = deload_point(turbine, surface, 8.0, 0.9)
    assert vals[3] == pt.omega_del  # %.17g round-trips exactly
