import math

import numpy as np
import pytest

from squeezephase.dynamics import (ExtendedState, IntegratorOptions,
                                   actions, covariance, eom_rhs, h_cl, h_eff,
                                   h_fl, integrate)
from squeezephase.errors import IntegrationError
from squeezephase.params import Constants, ParameterSchedule

TWO_PI = 2.0 * math.pi


def fluct_from_action_angle(J, theta):
    """Fluctuation point of given action-angle; inverse of actions()[1]."""
    r = math.sqrt(2.0 * J * (2.0 * J + 1.0))
    G = 2.0 * J + 0.5 - r * math.cos(theta)
    Pi = 0.5 * r * math.sin(theta) / G
    return G, Pi


# ----------------------------------------------------------------------
# energies, covariance, actions
# ----------------------------------------------------------------------

def test_h_cl_values():
    assert h_cl(1, 0, 1, 1, 0) == 0.5
    assert h_cl(1, 1, 1.1, 0.9, 0) == pytest.approx(1.0, abs=1e-15)
    assert h_cl(2, 3, 1, 1, 0.5) == pytest.approx(9.5, abs=1e-15)


def test_h_fl_values():
    assert h_fl(0.5, 0, 1, 1, 0) == pytest.approx(0.5, abs=1e-15)
    assert h_fl(1.0, 0, 1, 1, 0) == pytest.approx(0.625, abs=1e-15)
    # independent arithmetic for the perturbed coefficients
    G = 0.46667
    expected = 0.5 * (1.1 * G + 0.9 * 0.25 / G)
    assert h_fl(G, 0, 1.1, 0.9, 0) == pytest.approx(expected, rel=1e-15)


def test_h_fl_rejects_non_positive_width():
    with pytest.raises(ValueError):
        h_fl(0.0, 0, 1, 1, 0)
    with pytest.raises(ValueError):
        h_fl(-0.5, 0, 1, 1, 0)


def test_covariance_coherent_width():
    dq2, dp2, cov = covariance(0.5, 0.0, 1.0)
    assert (dq2, dp2, cov) == pytest.approx((0.5, 0.5, 0.0), abs=1e-15)
    assert dq2 * dp2 - cov ** 2 == pytest.approx(0.25, abs=1e-15)


def test_covariance_squeezed_identity():
    dq2, dp2, cov = covariance(1.0, 0.5, 1.0)
    assert (dq2, dp2, cov) == pytest.approx((1.0, 1.25, 1.0), abs=1e-15)
    assert dq2 * dp2 - cov ** 2 == pytest.approx(0.25, abs=1e-15)


def test_covariance_hbar_scaling():
    G = 0.46667
    dq2, dp2, cov = covariance(G, 0.0, 2.0)
    assert dq2 == pytest.approx(2.0 * G, rel=1e-15)
    assert dq2 * dp2 - cov ** 2 == pytest.approx(1.0, rel=1e-12)


def test_actions_fixed_point_is_zero():
    state = ExtendedState(q=0, p=0, G=0.5, Pi=0)
    assert actions(state) == pytest.approx((0.0, 0.0), abs=1e-15)


def test_actions_values():
    assert actions(ExtendedState(q=1, p=1, G=0.5, Pi=0))[0] == 1.0
    # (1 + 1/4 - 1)/4 by direct arithmetic
    assert actions(ExtendedState(q=0, p=0, G=1.0, Pi=0))[1] == \
        pytest.approx(0.0625, abs=1e-15)


@pytest.mark.parametrize("J", [0.01, 0.0625, 0.5, 2.0])
@pytest.mark.parametrize("theta", [0.0, 0.9, 2.5, 4.4])
def test_action_round_trip(J, theta):
    G, Pi = fluct_from_action_angle(J, theta)
    state = ExtendedState(q=0, p=0, G=G, Pi=Pi)
    assert actions(state)[1] == pytest.approx(J, rel=1e-12, abs=1e-13)


# ----------------------------------------------------------------------
# equations of motion
# ----------------------------------------------------------------------

def test_rhs_fixed_point_is_stationary():
    sched = ParameterSchedule.standard(0.0, 1.0)
    rhs = eom_rhs(ExtendedState(q=0, p=0, G=0.5, Pi=0), sched)
    assert np.max(np.abs(rhs[:4])) == 0.0


def test_rhs_unperturbed_oscillator():
    sched = ParameterSchedule.standard(0.0, 1.0)
    rhs = eom_rhs(ExtendedState(q=1, p=0, G=0.5, Pi=0), sched)
    assert rhs[:4] == pytest.approx([0.0, -1.0, 0.0, 0.0], abs=1e-15)


def test_rhs_against_finite_difference_of_flow():
    # one-sided second-order difference of the integrated flow
    sched = ParameterSchedule.standard(0.1, 1.0)
    state = ExtendedState(q=0, p=0, G=0.46667, Pi=0)
    rhs = eom_rhs(state, sched)
    opts = IntegratorOptions(rtol=1e-12, atol=1e-12)
    d = 1e-4
    y1 = integrate(state, d, sched, opts=opts).final.as_array()
    y2 = integrate(state, 2 * d, sched, opts=opts).final.as_array()
    fd = (4.0 * y1 - 3.0 * state.as_array() - y2) / (2.0 * d)
    assert fd[:4] == pytest.approx(rhs[:4], abs=1e-6)
    # slope of the first-order periodic orbit at t=0 within O(eps^2)
    assert rhs[3] == pytest.approx(-0.1 / 3.0, abs=0.01)


def test_rhs_rejects_collapsed_width():
    sched = ParameterSchedule.standard(0.0, 1.0)
    with pytest.raises(ValueError):
        ExtendedState(q=0, p=0, G=-0.5, Pi=0)


# ----------------------------------------------------------------------
# integration
# ----------------------------------------------------------------------

def test_centroid_period_return():
    sched = ParameterSchedule.standard(0.0, 1.0)
    final = integrate(ExtendedState(q=1, p=0, G=0.5, Pi=0),
                      TWO_PI, sched).final
    assert abs(final.q - 1.0) < 1e-8
    assert abs(final.p) < 1e-8


def test_fluctuation_half_period_return():
    sched = ParameterSchedule.standard(0.0, 1.0)
    final = integrate(ExtendedState(q=0, p=0, G=1.0, Pi=0),
                      math.pi, sched).final
    assert abs(final.G - 1.0) < 1e-8
    assert abs(final.Pi) < 1e-8


def test_fixed_and_adaptive_methods_agree():
    sched = ParameterSchedule.standard(0.05, 1.0)
    state = ExtendedState(q=1, p=0, G=0.5, Pi=0)
    ref = integrate(state, TWO_PI, sched,
                    opts=IntegratorOptions(rtol=1e-12, atol=1e-12)).final
    rk4 = integrate(state, TWO_PI, sched,
                    opts=IntegratorOptions(method="rk4-fixed",
                                           step=1e-3)).final
    assert np.max(np.abs(rk4.as_array() - ref.as_array())) < 1e-6


def test_trajectory_structure():
    sched = ParameterSchedule.standard(0.05, 1.0)
    state = ExtendedState(q=1, p=0, G=0.5, Pi=0)
    marks = [1.0, 2.5]
    traj = integrate(state, TWO_PI, sched, output_times=marks)
    assert traj.t[0] == 0.0
    assert np.all(np.diff(traj.t) > 0)
    assert np.all(traj.y[:, 2] > 0)
    for m in marks:
        assert m in traj.t
    assert traj.initial.as_array() == pytest.approx(state.as_array())


def test_requested_times_match_untargeted_run():
    # landing exactly on interior output times must not disturb accuracy
    sched = ParameterSchedule.standard(0.05, 1.0)
    state = ExtendedState(q=1, p=0, G=0.5, Pi=0)
    plain = integrate(state, TWO_PI, sched).final
    marked = integrate(state, TWO_PI, sched,
                       output_times=np.linspace(0.3, 6.0, 23)).final
    assert np.max(np.abs(plain.as_array() - marked.as_array())) < 1e-9


def test_integrate_rejects_bad_horizon():
    sched = ParameterSchedule.standard(0.0, 1.0)
    state = ExtendedState(q=1, p=0, G=0.5, Pi=0, t=1.0)
    with pytest.raises(ValueError):
        integrate(state, 0.5, sched)


def test_width_guard_reports_failure():
    # constant c < 0 with b = 0 gives dG/dt = 2cG: monotone width collapse
    # that must hit the positivity floor and abort with the last good time
    sched = ParameterSchedule.fourier(
        1.0, a=[(1.0, 0.0)], b=[(0.0, 0.0)], c=[(-1.0, 0.0)],
        require_elliptic=False)
    state = ExtendedState(q=0, p=0, G=1e-4, Pi=0.0)
    with pytest.raises(IntegrationError) as err:
        integrate(state, 10.0, sched)
    assert err.value.last_t is not None
    assert 0.0 < err.value.last_t < 10.0


# ----------------------------------------------------------------------
# structural invariants
# ----------------------------------------------------------------------

def test_actions_conserved_without_drive():
    sched = ParameterSchedule.standard(0.0, 1.0)
    state = ExtendedState(q=1.0, p=0.0, G=1.0, Pi=0.0)
    I0, J0 = actions(state)
    traj = integrate(state, 10 * TWO_PI, sched)
    for i in range(0, len(traj.t), 40):
        I, J = actions(traj.state_at_index(i))
        assert abs(I - I0) < 1e-8
        assert abs(J - J0) < 1e-8


def test_covariance_determinant_along_flow():
    sched = ParameterSchedule.standard(0.1, 1.0)
    hbar = 2.0
    traj = integrate(ExtendedState(q=0.3, p=-0.1, G=0.8, Pi=0.2),
                     TWO_PI, sched, consts=Constants(hbar=hbar))
    dq2, dp2, cov = covariance(traj.y[:, 2], traj.y[:, 3], hbar)
    assert np.max(np.abs(dq2 * dp2 - cov ** 2 - hbar ** 2 / 4)) < 1e-10


def test_fluctuation_flow_is_hbar_independent():
    sched = ParameterSchedule.standard(0.1, 1.0)
    state = ExtendedState(q=0.4, p=0.3, G=0.7, Pi=-0.1)
    finals = [integrate(state, TWO_PI, sched,
                        consts=Constants(hbar=h)).final
              for h in (0.5, 1.0, 2.0)]
    for f in finals[1:]:
        assert abs(f.G - finals[0].G) < 1e-8
        assert abs(f.Pi - finals[0].Pi) < 1e-8


def test_rk4_fourth_order_convergence():
    sched = ParameterSchedule.standard(0.05, 1.0)
    state = ExtendedState(q=1, p=0, G=0.5, Pi=0)
    ref = integrate(state, TWO_PI, sched,
                    opts=IntegratorOptions(rtol=1e-13, atol=1e-13)).final
    errs = [np.max(np.abs(
        integrate(state, TWO_PI, sched,
                  opts=IntegratorOptions(method="rk4-fixed", step=h)
                  ).final.as_array() - ref.as_array()))
        for h in (8e-3, 4e-3)]
    assert 12.0 <= errs[0] / errs[1] <= 20.0


def test_phase_additivity():
    sched = ParameterSchedule.standard(0.1, 1.0)
    state = ExtendedState(q=0.8, p=0.1, G=0.6, Pi=-0.05)
    mid = integrate(state, 2.3, sched).final
    split = integrate(mid, TWO_PI, sched).final
    whole = integrate(state, TWO_PI, sched).final
    assert abs(split.lambda_G - whole.lambda_G) < 1e-9
    assert abs(split.lambda_D - whole.lambda_D) < 1e-9


def test_h_eff_combines_parts():
    assert h_eff(1, 0, 0.5, 0, 1, 1, 0, hbar=2.0) == \
        pytest.approx(0.5 + 2.0 * 0.5, abs=1e-15)
