"""Built-in invariant suite behind the `check` subcommand.

Each check exercises one structural property the computations rely on
(symplecticity, conservation, quadrature consistency, hbar independence).
They run at desk scale and are shared with the test suite.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from . import dynamics, floquet, hannay, monodromy, orbits
from .params import Constants, ParameterSchedule


@dataclass
class CheckResult:
    name: str
    passed: bool
    detail: str


def _result(name, passed, detail):
    return CheckResult(name=name, passed=bool(passed), detail=detail)


def check_schedule_periodicity(eps=0.05, omega=1.0):
    sched = ParameterSchedule.standard(eps, omega)
    worst = 0.0
    for t in np.linspace(0.0, sched.period, 17):
        for k in (1, 7, 1001):
            base = np.array(sched.eval(t))
            shifted = np.array(sched.eval(t + k * sched.period))
            worst = max(worst, float(np.max(np.abs(shifted - base))))
    return _result("schedule-periodicity", worst < 1e-12,
                   f"max |eval(t+kT)-eval(t)| = {worst:.3e}")


def check_parameter_circuit(eps=0.05, omega=1.0):
    sched = ParameterSchedule.standard(eps, omega)
    worst = 0.0
    for t in np.linspace(0.0, sched.period, 257):
        a, b, c = sched.eval(t)
        worst = max(worst, abs(a + b - 2.0),
                    abs((a - 1.0) ** 2 + c * c - eps * eps))
    return _result("parameter-circuit", worst < 1e-12,
                   f"max circuit deviation = {worst:.3e}")


def check_action_conservation(omega=1.0):
    sched = ParameterSchedule.standard(0.0, omega)
    state = dynamics.ExtendedState(q=1.0, p=0.0, G=1.0, Pi=0.0)
    I0, J0 = dynamics.actions(state)
    traj = dynamics.integrate(state, 10 * sched.period, sched)
    worst = 0.0
    for i in range(0, len(traj.t), max(1, len(traj.t) // 64)):
        I, J = dynamics.actions(traj.state_at_index(i))
        worst = max(worst, abs(I - I0), abs(J - J0))
    return _result("action-conservation", worst < 1e-8,
                   f"max |dI|,|dJ| over 10 periods = {worst:.3e}")


def check_covariance_determinant(eps=0.05, omega=1.0, hbar=1.0):
    sched = ParameterSchedule.standard(eps, omega)
    state = dynamics.ExtendedState(q=0.3, p=-0.2, G=0.7, Pi=0.1)
    traj = dynamics.integrate(state, sched.period, sched,
                              consts=Constants(hbar=hbar))
    dq2, dp2, cov = dynamics.covariance(traj.y[:, 2], traj.y[:, 3], hbar)
    worst = float(np.max(np.abs(dq2 * dp2 - cov ** 2 - hbar ** 2 / 4.0)))
    return _result("covariance-determinant", worst < 1e-10,
                   f"max |det - hbar^2/4| = {worst:.3e}")


def check_rk4_convergence(eps=0.05, omega=1.0):
    sched = ParameterSchedule.standard(eps, omega)
    state = dynamics.ExtendedState(q=1.0, p=0.0, G=0.5, Pi=0.0)
    ref = dynamics.integrate(
        state, sched.period, sched,
        opts=dynamics.IntegratorOptions(rtol=1e-13, atol=1e-13)).final
    errs = []
    for h in (8e-3, 4e-3):
        end = dynamics.integrate(
            state, sched.period, sched,
            opts=dynamics.IntegratorOptions(method="rk4-fixed", step=h)).final
        errs.append(np.max(np.abs(end.as_array() - ref.as_array())))
    ratio = errs[0] / errs[1]
    return _result("rk4-self-convergence", 12.0 <= ratio <= 20.0,
                   f"halving-step error ratio = {ratio:.2f}")


def check_phase_additivity(eps=0.05, omega=1.0):
    sched = ParameterSchedule.standard(eps, omega)
    state = dynamics.ExtendedState(q=0.8, p=0.1, G=0.6, Pi=-0.05)
    T = sched.period
    mid = dynamics.integrate(state, 0.37 * T, sched).final
    two = dynamics.integrate(mid, T, sched).final
    one = dynamics.integrate(state, T, sched).final
    dev = max(abs(two.lambda_G - one.lambda_G),
              abs(two.lambda_D - one.lambda_D))
    return _result("phase-additivity", dev < 1e-9,
                   f"split-vs-single phase deviation = {dev:.3e}")


def check_hbar_independent_fluctuations(eps=0.05, omega=1.0):
    sched = ParameterSchedule.standard(eps, omega)
    state = dynamics.ExtendedState(q=0.5, p=0.2, G=0.6, Pi=0.1)
    ends = []
    for hbar in (0.5, 1.0, 2.0):
        end = dynamics.integrate(state, sched.period, sched,
                                 consts=Constants(hbar=hbar)).final
        ends.append((end.G, end.Pi))
    dev = max(abs(g - ends[0][0]) + abs(pi - ends[0][1]) for g, pi in ends)
    return _result("hbar-independent-fluctuations", dev < 1e-8,
                   f"(G,Pi) spread across hbar = {dev:.3e}")


def check_monodromy_symplectic(eps=0.05, omega=1.0):
    worst = 0.0
    for e in (0.0, eps):
        mono = monodromy.compute_monodromy(ParameterSchedule.standard(e, omega))
        worst = max(worst, abs(float(np.linalg.det(mono.M)) - 1.0))
    return _result("monodromy-symplectic", worst < 1e-10,
                   f"max |det M - 1| = {worst:.3e}")


def check_rotation_number_continuity(omega=1.0):
    rhos = [monodromy.compute_monodromy(
        ParameterSchedule.standard(e, omega)).rho
        for e in (0.0, 0.0125, 0.025, 0.0375, 0.05)]
    jump = max(abs(r2 - r1) for r1, r2 in zip(rhos, rhos[1:]))
    return _result("rotation-number-continuity", jump < 0.1,
                   f"max successive |drho| = {jump:.3e}")


def check_oracle_periodicity(eps=0.05, omega=1.0):
    sched = ParameterSchedule.standard(eps, omega)
    frame = monodromy.normal_form(monodromy.compute_monodromy(sched))
    x0 = monodromy.periodic_gaussian_oracle(frame)
    x1 = orbits.strob_map(x0, sched)
    dev = float(np.max(np.abs(np.array(x1) - np.array(x0))))
    return _result("oracle-periodicity", dev < 1e-7,
                   f"|Phi_T(oracle) - oracle| = {dev:.3e}")


def check_ensemble_invariance(eps=0.05, omega=1.0, N=64):
    sched = ParameterSchedule.standard(eps, omega)
    mono = monodromy.compute_monodromy(sched)
    frame = monodromy.normal_form(mono)
    ens = monodromy.torus_ensemble(frame, 1.0, N)
    Sinv = np.linalg.inv(frame.W @ frame.W.T)
    mapped = ens.points @ mono.M.T
    vals = np.einsum("ij,jk,ik->i", mapped, Sinv, mapped)
    dev = float(np.max(np.abs(vals - 2.0 * ens.I_bar0)))
    return _result("torus-invariance", dev < 1e-6,
                   f"max ellipse-residual of mapped points = {dev:.3e}")


def check_orbit_quadrature_identity(eps=0.05, omega=1.0):
    orb = orbits.find_periodic_orbit(ParameterSchedule.standard(eps, omega))
    dev = abs(orb.lambda_G_cycle - orb.lambda_G_cycle_alt)
    return _result("orbit-area-identity", dev < 1e-8,
                   f"|oint Pi dG + oint G dPi| = {dev:.3e}")


def check_orbit_shoelace(eps=0.05, omega=1.0):
    orb = orbits.find_periodic_orbit(ParameterSchedule.standard(eps, omega),
                                     n_samples=4096)
    x, y = orb.Pi[:-1], orb.G[:-1]
    area = 0.5 * float(np.sum(x * np.roll(y, -1) - np.roll(x, -1) * y))
    dev = abs(area - orb.lambda_G_cycle)
    return _result("orbit-shoelace-area", dev < 1e-8,
                   f"|shoelace - lambda_G| = {dev:.3e}")


def check_hannay_routes(eps=0.05, omega=1.0):
    model = hannay.PerturbativeModel(epsilon=eps, omega=omega)
    closed = hannay.hannay_closed_form(model)
    quad = hannay.hannay_quadrature(model)
    sched = ParameterSchedule.standard(eps, omega)
    traj = hannay.hannay_trajectory_estimate(sched)
    ok = abs(quad - closed) < 1e-5 and abs(traj - closed) < 5 * eps ** 3
    return _result(
        "hannay-routes-agree", ok,
        f"quad-closed = {quad - closed:.3e}, traj-closed = {traj - closed:.3e}")


def check_hannay_action_independence(eps=0.05, omega=1.0):
    model = hannay.PerturbativeModel(epsilon=eps, omega=omega)
    vals = [hannay.hannay_quadrature(model, n_t=256, n_phi=256, I_bar=ib)
            for ib in (0.5, 1.0, 2.0)]
    spread = max(vals) - min(vals)
    return _result("hannay-action-independence", spread < 1e-10,
                   f"quadrature spread across I_bar = {spread:.3e}")


def check_floquet_n0_reduction(eps=0.05, omega=1.0):
    sched = ParameterSchedule.standard(eps, omega)
    orb = orbits.find_periodic_orbit(sched)
    rep = floquet.relation_check(sched, 0)
    dev = max(abs(rep.lambda_G_R - orb.lambda_G_cycle),
              abs(rep.lambda_D_R - orb.lambda_D_cycle))
    return _result("floquet-n0-reduction", dev == 0.0,
                   f"n=0 phases vs orbit phases differ by {dev:.3e}")


def check_floquet_residuals(eps=0.05, omega=1.0):
    sched = ParameterSchedule.standard(eps, omega)
    reports = floquet.floquet_reports(sched, [0, 1, 2, 3])
    tol = 5 * eps ** 3
    worst45 = max(abs(r.residual_45) for r in reports)
    worst_tot = max(abs(r.residual_total) for r in reports)
    return _result(
        "floquet-headline-relation", worst45 <= tol and worst_tot <= tol,
        f"max |residual_45| = {worst45:.3e}, max |residual_total| = "
        f"{worst_tot:.3e} (tol {tol:.2e})")


def check_floquet_hbar_invariance(eps=0.05, omega=1.0, n=1):
    sched = ParameterSchedule.standard(eps, omega)
    vals = [floquet.relation_check(sched, n, consts=Constants(hbar=h),
                                   N=128).lambda_G_R
            for h in (0.5, 1.0, 2.0)]
    spread = max(vals) - min(vals)
    return _result("floquet-hbar-invariance", abs(spread) < 1e-8,
                   f"lambda_G_R spread across hbar = {spread:.3e}")


ALL_CHECKS = (
    check_schedule_periodicity,
    check_parameter_circuit,
    check_action_conservation,
    check_covariance_determinant,
    check_rk4_convergence,
    check_phase_additivity,
    check_hbar_independent_fluctuations,
    check_monodromy_symplectic,
    check_rotation_number_continuity,
    check_oracle_periodicity,
    check_ensemble_invariance,
    check_orbit_quadrature_identity,
    check_orbit_shoelace,
    check_hannay_routes,
    check_hannay_action_independence,
    check_floquet_n0_reduction,
    check_floquet_residuals,
    check_floquet_hbar_invariance,
)


def run_builtin_checks():
    """Run the whole suite (drive strengths 0 and 0.05 where relevant)."""
    return [fn() for fn in ALL_CHECKS]
