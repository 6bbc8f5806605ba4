import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from qghjm.curve import ForwardCurve, ModelParams
from qghjm.detsys import (PointClass, Regime, StepControl, corollary1_gap, basin_probe,
                          fixed_points, jacobian, picard_solve, rhs, solve, stationary_limit,
                          uniform_bound)
from qghjm.errors import NumericalFailure, UnsupportedConfiguration

FLAT = ForwardCurve.flat(0.05)
LINEAR = ForwardCurve.linear(0.05, 0.01)


def p(beta, sigma=0.2, curve=FLAT):
    return ModelParams(sigma, beta, curve)


def test_rhs_sigma0_rest():
    assert rhs(p(0.3, sigma=0.0), 1.0, (0.05, 0.0)) == (0.0, 0.0)


def test_rhs_headline_state():
    dr, dy = rhs(p(0.0), 0.0, (0.05, 0.0))
    assert dr == 0.0 and dy == pytest.approx(1e-4, rel=1e-14)


def test_rhs_vanishes_at_pi1():
    rep = fixed_points(p(0.1))
    dr, dy = rhs(p(0.1), 0.0, rep.pi1)
    assert abs(dr) < 1e-15 and abs(dy) < 1e-15


def test_sigma0_linear_tracks_curve():
    traj = solve(p(0.1, sigma=0.0, curve=LINEAR), 10.0)
    assert not traj.blown_up
    assert np.max(np.abs(traj.r - LINEAR.value(traj.times))) <= 1e-9


def test_headline_blowup_bracket():
    traj = solve(p(0.0), 80.0)
    assert traj.blown_up
    lo, hi = traj.blowup_bracket
    assert 66.0 <= lo < hi <= 67.0
    assert abs(traj.blowup_midpoint() - 66.5) <= 0.05
    assert traj.r[-1] > 1e6


def test_trajectory_invariants():
    traj = solve(p(0.0), 80.0)
    assert traj.times[0] == 0.0 and np.all(np.diff(traj.times) > 0)
    assert traj.states[0] == (0.05, 0.0)
    with pytest.raises(ValueError):
        traj.r[0] = 1.0


def test_beta02_converges_to_stationary_limit():
    params = p(0.2)
    traj = solve(params, 200.0)
    assert not traj.blown_up
    assert abs(traj.r[-1] - stationary_limit(params)) <= 1e-6


def test_hmin_failure_carries_partial():
    ctrl = StepControl(max_steps=5)
    with pytest.raises(NumericalFailure) as ei:
        solve(p(0.0), 80.0, ctrl)
    assert ei.value.partial is not None and ei.value.partial.t_end > 0


def test_picard_sigma_tiny():
    traj = picard_solve(p(0.1, sigma=1e-8, curve=LINEAR), 5.0, 501, 10)
    assert np.max(np.abs(traj.r - LINEAR.value(traj.times))) <= 1e-12


def test_picard_matches_solve():
    params = p(0.1)
    pic = picard_solve(params, 5.0, 2001, 50)
    ref = solve(params, 5.0, t_eval=pic.times)
    assert np.max(np.abs(pic.r - ref.r)) <= 1e-6
    assert np.max(np.abs(pic.y - ref.y)) <= 1e-6


def test_picard_beta0_kernel():
    params = p(0.0)
    pic = picard_solve(params, 20.0, 2001, 100)
    ref = solve(params, 20.0, t_eval=pic.times)
    assert np.max(np.abs(pic.r - ref.r)) <= 1e-6


def test_picard_respects_uniform_bound():
    params = p(0.5)
    pic = picard_solve(params, 50.0, 4001, 100)
    assert pic.info["converged"]
    assert np.max(pic.r) <= uniform_bound(params)


def test_uniform_bound_values():
    assert uniform_bound(p(0.5)) == pytest.approx(6.25 * (1 - math.sqrt(0.984)), rel=1e-12)
    assert uniform_bound(p(0.5)) == pytest.approx(0.0502016, abs=1e-7)
    assert uniform_bound(p(0.05)) is None
    assert abs(uniform_bound(p(100.0)) - 0.05) <= 1e-5


def test_stationary_limit_values():
    assert stationary_limit(p(0.1)) == pytest.approx(0.25 * (1 - math.sqrt(0.6)), rel=1e-12)
    assert stationary_limit(p(0.1)) == pytest.approx(0.0563508, abs=1e-7)
    b_c = 0.2 * math.sqrt(0.1)
    assert stationary_limit(p(b_c)) == pytest.approx(0.1, rel=1e-9)
    assert stationary_limit(p(0.1, curve=ForwardCurve.exponential(0.0, 0.05, 0.5))) == 0.0
    assert stationary_limit(p(0.1, curve=LINEAR)) is None


def test_corollary1_gap():
    g2 = corollary1_gap(p(2.0), 100.0)
    g4 = corollary1_gap(p(4.0), 100.0)
    assert g2.bound == pytest.approx(1.25e-5, rel=1e-12)
    assert g2.measured_gap <= 1.5 * g2.bound and g4.measured_gap <= 1.5 * g4.bound
    assert 3.5 <= g2.measured_gap / g4.measured_gap <= 4.5
    assert corollary1_gap(p(2.0, sigma=0.0), 100.0).measured_gap == 0.0


def test_fixed_points_beta01():
    rep = fixed_points(p(0.1))
    assert rep.regime is Regime.TWO_FIXED_POINTS
    assert rep.beta_critical == pytest.approx(0.063246, abs=1e-6)
    assert rep.pi1[0] == pytest.approx(0.0563508, abs=1e-7)
    assert rep.pi2[0] == pytest.approx(0.443649, abs=1e-6)
    # quoted eigen digits carry 6-digit rounding; closed form checked tightly below
    assert rep.eigen1 == pytest.approx((-0.066283, -0.233717), abs=1e-5)
    assert max(rep.eigen1) < 0 and min(rep.eigen2) < 0 < max(rep.eigen2)
    assert rep.class1 is PointClass.ATTRACTIVE_NODE and rep.class2 is PointClass.SADDLE_POINT


@pytest.mark.parametrize("beta", [0.07, 0.1, 0.3, 1.0])
def test_eigenvalues_match_numerical(beta):
    params = p(beta)
    rep = fixed_points(params)
    for pt, eig in ((rep.pi1, rep.eigen1), (rep.pi2, rep.eigen2)):
        num = np.sort(np.linalg.eigvals(jacobian(params, pt[0])).real)[::-1]
        assert np.allclose(eig, num, rtol=1e-12, atol=0)
        scale = params.sigma**2 * pt[0] ** 2 + params.beta * pt[0]
        assert rhs(params, 0.0, pt) == pytest.approx((0.0, 0.0), abs=1e-14 * max(1.0, scale))


def test_fixed_point_regimes():
    assert fixed_points(p(0.05)).regime is Regime.NO_FIXED_POINTS
    rep = fixed_points(p(0.2 * math.sqrt(0.1)))
    assert rep.regime is Regime.DEGENERATE
    assert rep.pi1[0] == pytest.approx(0.1, rel=1e-9)
    assert rep.pi1[1] == pytest.approx(0.05 * rep.beta_critical, rel=1e-9)


def test_fixed_points_rejects_non_flat():
    with pytest.raises(UnsupportedConfiguration):
        fixed_points(p(0.1, curve=LINEAR))


def test_basin_probe_outcomes():
    probes = basin_probe(p(0.1), [0.05, 1.0], [0.0], t_end=300.0)
    out = {b.r0: b.outcome for b in probes}
    assert out[0.05] == "pi1" and out[1.0] == "infinity"


def test_blowup_midpoint_monotone_in_beta():
    mids = [solve(p(b), 600.0).blowup_midpoint() for b in (0.0, 0.02, 0.04, 0.06)]
    assert all(m is not None for m in mids)
    assert all(a <= b for a, b in zip(mids, mids[1:]))


def test_step_halving_self_consistency():
    params = p(0.1)
    ctrl = StepControl(rtol=1e-7, atol=1e-7)
    a = solve(params, 40.0, ctrl).r[-1]
    b = solve(params, 40.0, ctrl.halved()).r[-1]
    assert abs(a - b) < 1e-7


@pytest.mark.parametrize("beta", [0.0, 0.03])
@pytest.mark.parametrize("curve", [LINEAR, ForwardCurve.exponential(0.08, 0.05, 0.3)])
def test_comparison_property(beta, curve):
    grid = np.linspace(0.0, 40.0, 401)
    upper = solve(p(beta, curve=curve), 40.0, t_eval=grid)
    lower = solve(p(beta), 40.0, t_eval=grid)
    n = min(upper.times.size, lower.times.size)
    assert np.all(upper.r[:n] >= lower.r[:n] - 1e-8)


@settings(max_examples=25, deadline=None)
@given(sigma=st.floats(0.01, 0.5), beta=st.floats(0.0, 1.0), lam=st.floats(0.005, 0.15),
       slope=st.floats(-0.002, 0.02))
def test_y_nonnegative(sigma, beta, lam, slope):
    traj = solve(p(beta, sigma=sigma, curve=ForwardCurve.linear(lam, slope)), 20.0,
                 StepControl(rtol=1e-8, atol=1e-12))
    assert np.all(traj.y >= -1e-12)
