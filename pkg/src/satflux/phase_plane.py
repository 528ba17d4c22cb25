"""Phase portrait of the ancillary problem ``psi(u')' + lam*f(u) = lam*a``.

Equilibria of ``f(u) = a``, the threshold ``lambda_h(a)`` at which the saddle
loop breaks, the confinement values ``u*``, ``u**`` and an orbit integrator
that survives |v| -> infinity.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from scipy.integrate import solve_ivp
from scipy.optimize import brentq

from .errors import BelowHomoclinicThreshold, OutsideBistableRange
from .model import F_MAX, bulk_force, bulk_force_deriv, level_potential


@dataclass(frozen=True)
class EquilibriaTriple:
    """Roots of f(u) = a: left saddle, centre, right saddle."""

    u_l: float
    c: float
    u_r: float

    def as_tuple(self):
        return (self.u_l, self.c, self.u_r)


def _check_bistable(a: float) -> None:
    if not abs(a) < F_MAX:
        raise OutsideBistableRange(f"|a| = {abs(a)!r} must be below 2/(3*sqrt(3)) = {F_MAX:.10f}")


def equilibria(a: float) -> EquilibriaTriple:
    """Solve u - u^3 = a for its three real roots, ordered ``u_l < c < u_r``.

    Trigonometric cubic formula followed by three Newton steps; the Newton
    polish recovers digits lost near the fold ``|a| -> 2/(3*sqrt(3))``.
    """
    _check_bistable(a)
    if a == 0.0:
        return EquilibriaTriple(-1.0, 0.0, 1.0)
    r = 2.0 / math.sqrt(3.0)
    phi = math.acos(max(-1.0, min(1.0, -1.5 * math.sqrt(3.0) * a)))
    roots = sorted(r * math.cos(phi / 3.0 - 2.0 * math.pi * k / 3.0) for k in range(3))
    polished = []
    for u in roots:
        for _ in range(3):
            d = bulk_force_deriv(1, u)
            if d == 0.0:
                break
            u -= (bulk_force(u) - a) / d
        polished.append(u)
    return EquilibriaTriple(*polished)


def _saddle_gaps(a: float):
    eq = equilibria(a)
    hc = level_potential(eq.c, a)
    return eq, hc - level_potential(eq.u_l, a), hc - level_potential(eq.u_r, a)


def homoclinic_lambda(a: float) -> float:
    """lambda_h(a): the saddle level H(saddle, 0) meets the vertical level H(c, +-inf).

    The condition ``1 + lam*(a*s - F(s)) = lam*(a*c - F(c))`` is linear in
    ``lam``; for a > 0 the binding saddle is ``u_r`` and for a < 0 it is
    ``u_l``.  Evaluated at ``|a|`` (the map u -> -u, a -> -a is a symmetry),
    so ``homoclinic_lambda(-a) == homoclinic_lambda(a)`` holds bit for bit.
    """
    if a == 0.0:
        raise ValueError("a = 0 has a heteroclinic loop; use heteroclinic_lambda()")
    _, gap_l, gap_r = _saddle_gaps(abs(a))
    return 1.0 / min(gap_l, gap_r)


def heteroclinic_lambda() -> float:
    """Break-up value of the a = 0 heteroclinic loop: 1/(F(1) - F(0)) = 4."""
    return 1.0 / (level_potential(0.0, 0.0) - level_potential(1.0, 0.0))


def loop_break_lambda(a: float) -> float:
    """lambda_h(a) for a != 0 and the heteroclinic value 4 for a = 0."""
    return heteroclinic_lambda() if a == 0.0 else homoclinic_lambda(a)


def confinement_values(lam: float, a: float) -> tuple[float, float]:
    """Return ``(u*, u**)``, the v = 0 crossings of the level H = H(c, +-inf).

    Classical orbits around the centre are confined to ``u* < u < u**``.
    Both are bracketed root-finds of ``1 + lam*(h(u) - h(c)) = 0`` with
    ``h(u) = a*u - F(u)`` on ``(u_l, c)`` and ``(c, u_r)``.
    """
    eq, gap_l, gap_r = _saddle_gaps(a)
    threshold = 1.0 / min(gap_l, gap_r)
    if not lam > threshold:
        raise BelowHomoclinicThreshold(
            f"lambda = {lam!r} must exceed the loop break-up value {threshold:.10g}"
        )
    hc = level_potential(eq.c, a)

    def level(u):
        return 1.0 + lam * (level_potential(u, a) - hc)

    u_star = brentq(level, eq.u_l, eq.c, xtol=1e-16, rtol=4 * np.finfo(float).eps, maxiter=200)
    u_star_star = brentq(level, eq.c, eq.u_r, xtol=1e-16, rtol=4 * np.finfo(float).eps, maxiter=200)
    return u_star, u_star_star


def linearized_period(lam: float, a: float) -> float:
    """Period 2*pi/sqrt(lam*f'(c)) of small oscillations about the centre."""
    if not lam > 0:
        raise ValueError("lambda must be positive")
    c = equilibria(a).c
    return 2.0 * math.pi / math.sqrt(lam * bulk_force_deriv(1, c))


def period_threshold_lambda(L: float, n: int, a: float) -> float:
    """Smallest lambda for which the linearized period drops below 2L/n.

    Advisory only: it inverts the small-amplitude period and says nothing
    about where classical branches actually terminate.
    """
    c = equilibria(a).c
    return (n * math.pi / L) ** 2 / bulk_force_deriv(1, c)


@dataclass
class Orbit:
    x: np.ndarray
    u: np.ndarray
    v: np.ndarray
    status: str  # "turned", "escaped" or "unfinished"


def integrate_orbit(lam, a, u0, v0=0.0, x_max=50.0, v_cap=1e6, rtol=1e-11, atol=1e-13):
    """Follow an orbit of the ancillary system until it turns, escapes or x_max.

    The system is integrated in arclength with the flux ``w = psi(v)`` as
    state, which keeps the right-hand side bounded as ``|v| -> inf``::

        du/ds = w,  dw/ds = lam*(a - f(u))*sqrt(1 - w^2),  dx/ds = sqrt(1 - w^2)

    ``status`` is "turned" when v returns to zero from above after leaving
    the start, "escaped" when |v| exceeds ``v_cap``.
    """
    w0 = v0 / math.hypot(1.0, v0)
    w_cap = v_cap / math.hypot(1.0, v_cap)

    def rhs(s, y):
        u, w, _ = y
        root = math.sqrt(max(0.0, 1.0 - w * w))
        return [w, lam * (a - bulk_force(u)) * root, root]

    def escaped(s, y):
        return w_cap - abs(y[1])

    escaped.terminal = True

    def turned(s, y):
        return y[1]

    turned.terminal = True
    turned.direction = -1

    # Stop on the first downward crossing of w = 0 (the turning point).
    s_max = 4.0 * x_max + 10.0
    sol = solve_ivp(rhs, (0.0, s_max), [u0, w0, 0.0], method="DOP853", rtol=rtol, atol=atol,
                    events=(escaped, turned), dense_output=False, max_step=0.05)
    u, w, x = sol.y
    if sol.t_events[0].size:
        status = "escaped"
    elif sol.t_events[1].size and sol.t_events[1][-1] > 0.0:
        status = "turned"
    else:
        status = "unfinished"
    keep = x <= x_max
    u, w, x = u[keep], w[keep], x[keep]
    v = w / np.sqrt(np.maximum(1.0 - w * w, 1e-300))
    return Orbit(x=x, u=u, v=v, status=status)
