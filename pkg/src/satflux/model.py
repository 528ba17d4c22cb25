"""Double-well nonlinearity, saturating flux and the ancillary phase-plane system.

All scalar functions accept floats or numpy arrays.  The bulk force is fixed
to ``f(u) = u - u**3`` (the negative derivative of ``W(u) = u**4/4 - u**2/2``)
and the interface energy to ``Psi(s) = sqrt(1 + s**2) - 1``.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

#: Local maximum of f on u > 0, attained at u = 1/sqrt(3).
F_MAX = 2.0 / (3.0 * math.sqrt(3.0))
#: Spinodal value: f'(M) > 0 iff |M| < SPINODAL.
SPINODAL = 1.0 / math.sqrt(3.0)


@dataclass(frozen=True)
class ModelParams:
    """Interval length ``L``, prescribed mean ``M`` and ``lam = 1/epsilon``."""

    L: float
    M: float
    lam: float

    def __post_init__(self):
        if not (math.isfinite(self.L) and self.L > 0):
            raise ValueError(f"L must be positive and finite, got {self.L!r}")
        if not math.isfinite(self.M):
            raise ValueError(f"M must be finite, got {self.M!r}")
        if not (math.isfinite(self.lam) and self.lam > 0):
            raise ValueError(f"lambda must be positive and finite, got {self.lam!r}")

    @property
    def epsilon(self) -> float:
        return 1.0 / self.lam


@dataclass(frozen=True)
class PhasePoint:
    """A state ``(u, v = u_x)`` of the first-order ancillary system."""

    u: float
    v: float

    def __post_init__(self):
        if not (math.isfinite(self.u) and math.isfinite(self.v)):
            raise ValueError("phase points must be finite; use energy_at_vertical for |v| = inf")


def bulk_force(u):
    """f(u) = u - u^3."""
    return u - u * u * u


def bulk_force_deriv(order: int, u):
    """Derivative of f of the given order (1, 2 or 3)."""
    if order == 1:
        return 1.0 - 3.0 * u * u
    if order == 2:
        return -6.0 * u
    if order == 3:
        return -6.0 + 0.0 * u
    raise ValueError(f"order must be 1, 2 or 3, got {order!r}")


def bulk_primitive(u):
    """F(u) = u^2/2 - u^4/4, the antiderivative of f with F(0) = 0."""
    u2 = u * u
    return 0.5 * u2 - 0.25 * u2 * u2


def flux(s):
    """Mean-curvature flux psi(s) = s / sqrt(1 + s^2), saturating at +-1."""
    return s / np.hypot(1.0, s)


def interface_energy(s):
    """Psi(s) = sqrt(1 + s^2) - 1, written to avoid cancellation for small s."""
    s2 = s * s
    return s2 / (np.hypot(1.0, s) + 1.0)


def level_potential(u, a):
    """a*u - F(u); the u-dependent part of the first integral (without lambda)."""
    return a * u - bulk_primitive(u)


def first_integral(p: PhasePoint, lam: float, a: float) -> float:
    """H(u, v) = 1/sqrt(1 + v^2) + lam * (a*u - F(u))."""
    return 1.0 / math.hypot(1.0, p.v) + lam * level_potential(p.u, a)


def energy_at_vertical(u: float, lam: float, a: float) -> float:
    """Limit of H(u, v) as |v| -> infinity."""
    return lam * level_potential(u, a)


def ancillary_rhs(p: PhasePoint, lam: float, a: float) -> PhasePoint:
    """Vector field u' = v, v' = lam * (a - f(u)) * (1 + v^2)^(3/2)."""
    w = 1.0 + p.v * p.v
    return PhasePoint(p.v, lam * (a - bulk_force(p.u)) * w * math.sqrt(w))


def ancillary_rhs_array(x, y, lam, a):
    """Array form of :func:`ancillary_rhs` for ODE integrators: ``y = (u, v)``."""
    u, v = y
    w = 1.0 + v * v
    return np.array([v, lam * (a - bulk_force(u)) * w * np.sqrt(w)])
