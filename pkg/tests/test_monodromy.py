import math

import numpy as np
import pytest

from squeezephase.dynamics import ExtendedState, integrate
from squeezephase.errors import NonEllipticError
from squeezephase.monodromy import (Monodromy, compute_monodromy, normal_form,
                                    periodic_gaussian_oracle, torus_ensemble)
from squeezephase.orbits import find_periodic_orbit
from squeezephase.params import ParameterSchedule

TWO_PI = 2.0 * math.pi


def rotation(sigma):
    # rotation advancing the angle of (q, p) = sqrt(2I) (sin, cos)
    return np.array([[math.cos(sigma), math.sin(sigma)],
                     [-math.sin(sigma), math.cos(sigma)]])


def mono_of(M, period=TWO_PI):
    return Monodromy(M=M, sigma=0.0, winding=0, rho=0.0, period=period)


# ----------------------------------------------------------------------
# monodromy computation
# ----------------------------------------------------------------------

def test_unperturbed_monodromy_is_identity():
    mono = compute_monodromy(ParameterSchedule.standard(0.0, 1.0))
    assert np.max(np.abs(mono.M - np.eye(2))) < 1e-10
    assert mono.sigma == 0.0
    assert mono.winding == 1
    assert mono.rho == pytest.approx(TWO_PI, abs=1e-12)


def test_rotation_number_matches_meanfield_frequency():
    mono = compute_monodromy(ParameterSchedule.standard(0.1, 1.0))
    assert mono.rho == pytest.approx(TWO_PI * (1 - 0.01 / 3), abs=5e-3 ** 1)
    # tighter: the known accuracy of the second-order frequency
    assert abs(mono.rho - TWO_PI * (1 - 0.01 / 3)) < 5 * 0.1 ** 3


def test_rotation_number_slow_drive():
    eps, omega = 0.05, 0.5
    mono = compute_monodromy(ParameterSchedule.standard(eps, omega))
    pred = (1 - eps ** 2 / (omega + 2.0)) * TWO_PI / omega
    assert abs(mono.rho - pred) < 5 * eps ** 3


def test_determinant_symplectic():
    for eps, omega in [(0.0, 1.0), (0.1, 1.0), (0.2, 0.7), (0.05, 2.0)]:
        mono = compute_monodromy(ParameterSchedule.standard(eps, omega))
        assert abs(np.linalg.det(mono.M) - 1.0) < 1e-10


def test_rotation_number_continuous_in_drive():
    rhos = [compute_monodromy(ParameterSchedule.standard(e, 1.0)).rho
            for e in np.arange(0.0, 0.11, 0.01)]
    assert max(abs(b - a) for a, b in zip(rhos, rhos[1:])) < 0.1


def test_resonant_drive_keeps_elliptic_map():
    # omega = 2 parks the map next to minus identity; the frame must
    # still resolve it and the rotation number must track the frequency
    eps, omega = 0.02, 2.0
    mono = compute_monodromy(ParameterSchedule.standard(eps, omega))
    pred = (1 - eps ** 2 / (omega + 2.0)) * TWO_PI / omega
    assert abs(mono.rho - pred) < 5 * eps ** 3


# ----------------------------------------------------------------------
# normal form
# ----------------------------------------------------------------------

def test_normal_form_of_pure_rotation():
    frame = normal_form(mono_of(rotation(0.3)))
    R = np.linalg.solve(frame.W, rotation(0.3) @ frame.W)
    assert np.max(np.abs(R - rotation(0.3))) < 1e-12
    assert abs(np.linalg.det(frame.W) - 1.0) < 1e-12


def test_normal_form_of_sheared_elliptic_map():
    shear = np.array([[1.0, 0.7], [0.0, 1.0]])
    M = shear @ rotation(1.0) @ np.linalg.inv(shear)
    frame = normal_form(mono_of(M))
    assert abs(np.linalg.det(frame.W) - 1.0) < 1e-10
    R = np.linalg.solve(frame.W, M @ frame.W)
    assert np.max(np.abs(R @ R.T - np.eye(2))) < 1e-8
    assert np.max(np.abs(R - rotation(1.0))) < 1e-8


def test_normal_form_invariants_from_schedule():
    mono = compute_monodromy(ParameterSchedule.standard(0.1, 1.0))
    frame = normal_form(mono)
    assert abs(np.linalg.det(frame.W) - 1.0) < 1e-10
    R = np.linalg.solve(frame.W, mono.M @ frame.W)
    assert np.max(np.abs(R @ R.T - np.eye(2))) < 1e-8


def test_normal_form_rejects_hyperbolic():
    M = np.diag([2.0, 0.5])
    with pytest.raises(NonEllipticError):
        normal_form(mono_of(M))


def test_normal_form_rejects_sheared_parabolic():
    M = np.array([[1.0, 1.0], [0.0, 1.0]])
    with pytest.raises(NonEllipticError):
        normal_form(mono_of(M))


def test_frame_is_deterministic():
    mono = compute_monodromy(ParameterSchedule.standard(0.15, 0.9))
    W1 = normal_form(mono).W
    W2 = normal_form(compute_monodromy(
        ParameterSchedule.standard(0.15, 0.9))).W
    assert np.array_equal(W1, W2)


# ----------------------------------------------------------------------
# torus ensembles
# ----------------------------------------------------------------------

def test_unperturbed_ensemble_is_circle():
    frame = normal_form(compute_monodromy(ParameterSchedule.standard(0.0, 1.0)))
    ens = torus_ensemble(frame, 1.0, 8)
    r = math.sqrt(2.0)
    # quarter-turn members sit on the axes of the radius-sqrt(2) circle
    expected = np.array([[0, r], [r, 0], [0, -r], [-r, 0]])
    assert np.max(np.abs(ens.points[[0, 2, 4, 6]] - expected)) < 1e-12
    assert np.max(np.abs(np.hypot(ens.points[:, 0], ens.points[:, 1]) - r)) \
        < 1e-12


def test_ensemble_membership_identity():
    frame = normal_form(compute_monodromy(ParameterSchedule.standard(0.1, 1.0)))
    ens = torus_ensemble(frame, 0.7, 64)
    Sinv = np.linalg.inv(frame.W @ frame.W.T)
    vals = np.einsum("ij,jk,ik->i", ens.points, Sinv, ens.points)
    assert np.max(np.abs(vals - 1.4)) < 1e-8


def test_ensemble_area_is_action():
    # shoelace of the inscribed polygon, corrected by the exact N-gon
    # factor (an affine image of the regular polygon in the circle)
    frame = normal_form(compute_monodromy(ParameterSchedule.standard(0.2, 0.8)))
    N, I_bar = 256, 1.0
    ens = torus_ensemble(frame, I_bar, N)
    x, y = ens.points[:, 0], ens.points[:, 1]
    shoelace = 0.5 * abs(np.sum(x * np.roll(y, -1) - np.roll(x, -1) * y))
    area = shoelace * (TWO_PI / N) / math.sin(TWO_PI / N)
    assert abs(area - TWO_PI * I_bar) < 1e-6


def test_ensemble_invariant_under_period_map():
    # propagate each point through the full nonlinear pass (the centroid
    # subsystem is linear, so this is also the monodromy action) and check
    # it lands back on the same ellipse
    sched = ParameterSchedule.standard(0.1, 1.0)
    mono = compute_monodromy(sched)
    frame = normal_form(mono)
    ens = torus_ensemble(frame, 1.0, 16)
    Sinv = np.linalg.inv(frame.W @ frame.W.T)
    for point in ens.points:
        final = integrate(ExtendedState(q=point[0], p=point[1], G=0.5, Pi=0),
                          sched.period, sched).final
        image = np.array([final.q, final.p])
        assert abs(image @ Sinv @ image - 2.0) < 1e-6


def test_ensemble_argument_validation():
    frame = normal_form(compute_monodromy(ParameterSchedule.standard(0.0, 1.0)))
    with pytest.raises(ValueError):
        torus_ensemble(frame, -1.0, 16)
    with pytest.raises(ValueError):
        torus_ensemble(frame, 1.0, 4)


# ----------------------------------------------------------------------
# periodic Gaussian oracle
# ----------------------------------------------------------------------

def test_oracle_unperturbed_fixed_point():
    frame = normal_form(compute_monodromy(ParameterSchedule.standard(0.0, 1.0)))
    G0, Pi0 = periodic_gaussian_oracle(frame)
    assert G0 == pytest.approx(0.5, abs=1e-10)
    assert Pi0 == pytest.approx(0.0, abs=1e-10)


def test_oracle_first_order_location():
    eps = 0.1
    frame = normal_form(compute_monodromy(ParameterSchedule.standard(eps, 1.0)))
    G0, Pi0 = periodic_gaussian_oracle(frame)
    assert abs(G0 - (0.5 - eps / 3.0)) < 3 * eps ** 2
    assert abs(Pi0) < 3 * eps ** 2


@pytest.mark.parametrize("eps", [0.05, 0.2])
def test_oracle_matches_newton_solver(eps):
    sched = ParameterSchedule.standard(eps, 1.0)
    frame = normal_form(compute_monodromy(sched))
    G0, Pi0 = periodic_gaussian_oracle(frame)
    orb = find_periodic_orbit(sched)
    assert abs(G0 - orb.G0) < 1e-8
    assert abs(Pi0 - orb.Pi0) < 1e-8


def test_oracle_point_is_periodic_under_flow():
    sched = ParameterSchedule.standard(0.1, 1.0)
    frame = normal_form(compute_monodromy(sched))
    G0, Pi0 = periodic_gaussian_oracle(frame)
    final = integrate(ExtendedState(q=0, p=0, G=G0, Pi=Pi0),
                      sched.period, sched).final
    assert abs(final.G - G0) < 1e-7
    assert abs(final.Pi - Pi0) < 1e-7
