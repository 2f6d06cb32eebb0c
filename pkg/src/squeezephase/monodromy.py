"""Linear analysis of the centroid subsystem over one period.

The (q, p) equations are linear, so the time-T flow is a 2x2 symplectic
matrix M (the monodromy).  In the elliptic regime |tr M| < 2 it is
conjugate to a rotation: M = W R(sigma) W^-1 with det W = 1, where R is
the rotation matrix in the angle convention q = sqrt(2I) sin(phi),
p = sqrt(2I) cos(phi).  The continuous rotation number rho = 2*pi*k + sigma
counts full windings of the flow, recovered by unwrapping the angle of a
fundamental solution expressed in the W frame.

W also fixes the unique M-invariant symmetric unimodular form S = W W^T;
the Gaussian state whose covariance is (hbar/2) S returns to itself after
one period, which gives a non-perturbative oracle for the periodic
fluctuation orbit.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .dynamics import IntegratorOptions, integrate_ode
from .errors import NonEllipticError
from .params import ParameterSchedule

# 2x2 symplectic unit, [q, p] ordering.
_J = np.array([[0.0, 1.0], [-1.0, 0.0]])

# Below this distance from +/- identity the eigenbasis is meaningless and
# the map is treated as the exact rotation by 0 or pi.
_IDENTITY_TOL = 1e-9

# Truly degenerate normal form; refuse rather than return noise.  (The
# ellipticity of the schedule does not prevent the stroboscopic map from
# grazing the parabolic boundary at resonant omega.)
_PARABOLIC_TOL = 1e-12


@dataclass
class Monodromy:
    """Time-T flow matrix of the linear centroid system and its rotation."""

    M: np.ndarray
    sigma: float      # normal-form rotation in [0, 2*pi)
    winding: int      # full turns completed during one period
    rho: float        # 2*pi*winding + sigma
    period: float


@dataclass
class NormalFrame:
    """Symplectic frame W with W^-1 M W a pure rotation."""

    W: np.ndarray
    sigma: float
    period: float


@dataclass
class TorusEnsemble:
    """Uniform-angle sample of the M-invariant ellipse of action I_bar0."""

    I_bar0: float
    angles: np.ndarray   # normal-form angles phi_bar_j
    points: np.ndarray   # shape (N, 2) rows (q, p)


def _matrix_rhs(sched):
    def rhs(t, y):
        a, b, c = sched.eval(t)
        m = y.reshape(2, 2)
        out = np.empty((2, 2))
        # A(t) = [[c, b], [-a, -c]] acting on the left
        out[0] = c * m[0] + b * m[1]
        out[1] = -a * m[0] - c * m[1]
        return out.reshape(-1)
    return rhs


def _fundamental_path(sched, opts, n_track):
    T = sched.period
    grid = np.linspace(0.0, T, n_track + 1)
    ts, ys = integrate_ode(_matrix_rhs(sched), 0.0, np.eye(2).reshape(-1), T,
                           opts, output_times=grid[1:-1])
    return ts, ys.reshape(-1, 2, 2)


# the matrix flow is cheap; run it tighter than the trajectory default so
# the symplectic determinant holds to 1e-10 even for slow drives
_MATRIX_OPTS = IntegratorOptions(rtol=1e-12, atol=1e-12)


def compute_monodromy(sched: ParameterSchedule,
                      opts: IntegratorOptions = None,
                      n_track: int = None) -> Monodromy:
    """Integrate dM/dt = A(t) M over one period and extract (sigma, k, rho).

    The winding k comes from unwrapping the normal-frame angle of one
    solution column along a dense grid (fine enough that each increment
    stays well under pi/2), then rounding (total - sigma)/(2*pi).
    """
    T = sched.period
    if opts is None:
        opts = _MATRIX_OPTS
    if n_track is None:
        # ~64 samples per unit rotation of the unperturbed flow
        n_track = max(256, int(64 * T / math.pi))
    _, Ms = _fundamental_path(sched, opts, n_track)
    M = Ms[-1]
    det = float(np.linalg.det(M))
    if abs(det - 1.0) > 1e-8:
        raise NonEllipticError(
            f"monodromy determinant {det} deviates from 1; integration failed")
    tr = float(np.trace(M))
    if abs(tr) >= 2.0 and not _near_identity_like(M):
        raise NonEllipticError(
            f"|tr M| = {abs(tr):.6f} >= 2: stroboscopic map is not elliptic")

    W, sigma = _frame_of(M)
    Winv = np.linalg.inv(W)
    x0 = W @ np.array([0.0, 1.0])  # normal-form angle zero
    path = Ms @ x0                 # shape (K, 2)
    qp = path @ Winv.T
    theta = np.unwrap(np.arctan2(qp[:, 0], qp[:, 1]))
    total = float(theta[-1] - theta[0])
    winding = int(round((total - sigma) / (2.0 * math.pi)))
    rho = 2.0 * math.pi * winding + sigma
    if abs(rho - total) > 0.5:
        raise RuntimeError(
            f"winding tracking inconsistent: unwrapped {total}, "
            f"normal-form sigma {sigma}")
    return Monodromy(M=M, sigma=sigma, winding=winding, rho=rho, period=T)


def _near_identity_like(M):
    return (np.abs(M - np.eye(2)).max() < _IDENTITY_TOL
            or np.abs(M + np.eye(2)).max() < _IDENTITY_TOL)


def _frame_of(M):
    """Normal frame W and rotation sigma in [0, 2*pi) of an elliptic M."""
    if np.abs(M - np.eye(2)).max() < _IDENTITY_TOL:
        return np.eye(2), 0.0
    if np.abs(M + np.eye(2)).max() < _IDENTITY_TOL:
        return np.eye(2), math.pi
    tr = float(np.trace(M))
    if abs(tr) >= 2.0:
        raise NonEllipticError(f"|tr M| = {abs(tr):.6f} >= 2, not elliptic")
    if 2.0 - abs(tr) <= _PARABOLIC_TOL:
        raise NonEllipticError(
            f"2 - |tr M| = {2.0 - abs(tr):.3e}: too close to parabolic, "
            "normal form is degenerate")

    evals, evecs = np.linalg.eig(M)
    W = None
    for i in range(2):
        v = evecs[:, i]
        u, w = v.real, v.imag
        if float(u @ _J @ w) > 0.0:
            # orientation matches the flow convention
            lam = evals[i]
            # fix the eigenvector phase: leading component real positive
            pivot = v[0] if abs(v[0]) > 1e-12 else v[1]
            v = v * np.exp(-1j * np.angle(pivot))
            u, w = v.real, v.imag
            v = v / math.sqrt(float(u @ _J @ w))
            u, w = v.real, v.imag
            W = np.column_stack([u, w])
            sigma = float(np.angle(lam)) % (2.0 * math.pi)
            break
    if W is None:
        raise NonEllipticError("no positively oriented eigenvector found")
    # enforce det W = 1 exactly against roundoff
    W = W / math.sqrt(float(np.linalg.det(W)))
    return W, sigma


def normal_form(mono: Monodromy) -> NormalFrame:
    """Symplectic frame in which the monodromy is the rotation by sigma."""
    W, sigma = _frame_of(mono.M)
    R = np.linalg.solve(W, mono.M @ W)
    if np.abs(R @ R.T - np.eye(2)).max() > 1e-8:
        raise NonEllipticError(
            "normal form failed orthogonality check; map too close to "
            "parabolic for a reliable frame")
    return NormalFrame(W=W, sigma=sigma, period=mono.period)


def torus_ensemble(frame: NormalFrame, I_bar0: float, N: int) -> TorusEnsemble:
    """N points on the invariant ellipse of action I_bar0, uniform in the
    normal-form angle (the measure preserved by the stroboscopic rotation).
    """
    if not I_bar0 > 0.0:
        raise ValueError(f"I_bar0 must be positive, got {I_bar0}")
    if N < 8:
        raise ValueError(f"N must be >= 8, got {N}")
    phis = 2.0 * math.pi * np.arange(N) / N
    r = math.sqrt(2.0 * I_bar0)
    circle = np.column_stack([r * np.sin(phis), r * np.cos(phis)])
    return TorusEnsemble(I_bar0=float(I_bar0), angles=phis,
                         points=circle @ frame.W.T)


def periodic_gaussian_oracle(frame: NormalFrame):
    """Initial (G0, Pi0) of the exactly T-periodic fluctuation orbit.

    S = W W^T is the unique M-invariant positive symmetric unimodular form;
    the Gaussian covariance (hbar/2) S is therefore fixed by the return map,
    and G0 = S11/2, Pi0 = S12/(2 S11) translates it to fluctuation
    coordinates.  Exact at any drive strength, independent of hbar.
    """
    S = frame.W @ frame.W.T
    G0 = S[0, 0] / 2.0
    Pi0 = S[0, 1] / (2.0 * S[0, 0])
    return float(G0), float(Pi0)
