"""Periodic coefficient schedules a(t), b(t), c(t) and global constants.

The generalized harmonic oscillator H = (a q^2 + b p^2 + c(qp+pq))/2 is
driven by coefficients with a common period T.  Two schedule kinds are
supported: the one-parameter standard family

    a = 1 + eps*cos(omega*t),  b = 1 - eps*cos(omega*t),  c = eps*sin(omega*t)

and a generic truncated Fourier series per coefficient.  Bounded motion
requires the elliptic condition a*b > c^2 everywhere on the period.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

from .errors import NonEllipticError

DEFAULT_ELLIPTICITY_SAMPLES = 4096

STANDARD = "standard-family"
FOURIER = "fourier"


@dataclass(frozen=True)
class Constants:
    """Physical constants: hbar sets the action scale of the fluctuations."""

    hbar: float = 1.0

    def __post_init__(self):
        if not (self.hbar > 0.0 and math.isfinite(self.hbar)):
            raise ValueError(f"hbar must be positive and finite, got {self.hbar}")


@dataclass(frozen=True)
class ParameterSchedule:
    """T-periodic coefficient triple of the oscillator.

    Build through :meth:`standard` or :meth:`fourier`; the raw constructor
    performs no ellipticity validation (useful for probing bad schedules
    with :func:`ellipticity_margin`).
    """

    kind: str
    period: float
    epsilon: float = 0.0
    omega: float = 0.0
    # Fourier data: per coefficient, a tuple of (cos, sin) pairs; index k
    # multiplies cos/sin(2*pi*k*t/T), so k=0 carries the constant term.
    a_coeffs: tuple = ()
    b_coeffs: tuple = ()
    c_coeffs: tuple = ()

    @classmethod
    def standard(cls, epsilon: float, omega: float) -> "ParameterSchedule":
        if not (0.0 <= epsilon < 1.0):
            raise NonEllipticError(
                f"standard family requires 0 <= epsilon < 1, got {epsilon}"
            )
        if not (omega > 0.0 and math.isfinite(omega)):
            raise ValueError(f"omega must be positive and finite, got {omega}")
        return cls(kind=STANDARD, period=2.0 * math.pi / omega,
                   epsilon=float(epsilon), omega=float(omega))

    @classmethod
    def fourier(cls, period: float, a, b, c,
                require_elliptic: bool = True) -> "ParameterSchedule":
        """Generic schedule from (cos, sin) coefficient pairs for a, b, c."""
        if not (period > 0.0 and math.isfinite(period)):
            raise ValueError(f"period must be positive and finite, got {period}")
        sched = cls(kind=FOURIER, period=float(period),
                    a_coeffs=_pairs(a), b_coeffs=_pairs(b), c_coeffs=_pairs(c))
        if require_elliptic:
            margin = ellipticity_margin(sched)
            if margin <= 0.0:
                raise NonEllipticError(
                    f"schedule violates a*b > c^2 (sampled margin {margin:.6g})"
                )
        return sched

    def eval(self, t: float):
        """Coefficients (a, b, c) at time t, exactly T-periodic.

        The argument is reduced modulo T before any trigonometric call so
        that phase quadratures over many periods do not drift.
        """
        tau = t % self.period
        if self.kind == STANDARD:
            w = self.omega * tau
            ec = self.epsilon * math.cos(w)
            return 1.0 + ec, 1.0 - ec, self.epsilon * math.sin(w)
        base = 2.0 * math.pi * tau / self.period
        return (_fourier_eval(self.a_coeffs, base),
                _fourier_eval(self.b_coeffs, base),
                _fourier_eval(self.c_coeffs, base))


def _pairs(coeffs):
    out = tuple((float(c), float(s)) for c, s in coeffs)
    if not out:
        raise ValueError("fourier coefficient list must not be empty")
    return out


def _fourier_eval(coeffs, base):
    total = coeffs[0][0]  # k=0 sine has no effect
    for k in range(1, len(coeffs)):
        ck, sk = coeffs[k]
        total += ck * math.cos(k * base) + sk * math.sin(k * base)
    return total


def schedule_eval(sched: ParameterSchedule, t: float):
    """Coefficient triple (a, b, c) at time t."""
    return sched.eval(t)


def ellipticity_margin(sched: ParameterSchedule,
                       n_samples: int = DEFAULT_ELLIPTICITY_SAMPLES) -> float:
    """Minimum of a*b - c^2 over a uniform sample of one period.

    A non-positive margin means the schedule leaves the elliptic regime;
    it is returned, not raised, so callers can probe invalid schedules.
    """
    if n_samples < 16:
        raise ValueError(f"n_samples must be >= 16, got {n_samples}")
    if sched.kind == STANDARD:
        # a*b - c^2 = 1 - eps^2 identically; sampling kept as a cross-check.
        margin = 1.0 - sched.epsilon ** 2
        return margin
    margin = math.inf
    for i in range(n_samples):
        a, b, c = sched.eval(sched.period * i / n_samples)
        margin = min(margin, a * b - c * c)
    return margin
