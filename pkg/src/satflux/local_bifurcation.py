"""Pitchfork bifurcations from the trivial state ``u = M``.

Closed forms for the onset values ``lambda_k``, the critical length ``L*``
that separates sub- from supercritical branches, and the reduced
coefficients ``h_yyy``, ``h_lambda_y``.  :func:`verify_reduction` rebuilds
the two coefficients from the projected inner products by quadrature.
"""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass

import numpy as np

from .errors import BelowFirstBifurcation, NoBifurcationRegime
from .model import SPINODAL, bulk_force_deriv

#: Critical-length formula has a vertical asymptote at |M| = 1/sqrt(5).
ASYMPTOTE_M = 1.0 / math.sqrt(5.0)
# Relative distance to L* below which a pitchfork is reported as degenerate.
DEGENERATE_RTOL = 1e-4


class PitchforkKind(str, enum.Enum):
    SUPERCRITICAL = "Supercritical"
    SUBCRITICAL = "Subcritical"
    NO_BIFURCATION = "NoBifurcation"


@dataclass(frozen=True)
class PitchforkClass:
    """Classification of the k-th pitchfork from ``u = M``.

    ``lambda_k``, ``h_yyy`` and ``h_lambda_y`` are ``None`` when there is no
    bifurcation.  ``degenerate`` marks ``L`` within ``DEGENERATE_RTOL`` of
    ``L*`` where the cubic coefficient vanishes.
    """

    kind: PitchforkKind
    k: int
    L: float
    M: float
    lambda_k: float | None = None
    h_yyy: float | None = None
    h_lambda_y: float | None = None
    critical_length: float | None = None
    degenerate: bool = False

    def as_dict(self):
        return {
            "kind": self.kind.value,
            "k": self.k,
            "L": self.L,
            "M": self.M,
            "lambda_k": self.lambda_k,
            "critical_length": self.critical_length,
            "h_yyy": self.h_yyy,
            "h_lambda_y": self.h_lambda_y,
            "degenerate": self.degenerate,
        }


def _check_k(k):
    if int(k) != k or k < 1:
        raise ValueError(f"mode index k must be a positive integer, got {k!r}")


def _check_regime(M):
    fp = bulk_force_deriv(1, M)
    if not fp > 0.0:
        raise NoBifurcationRegime(f"f'(M) = {fp:.6g} <= 0 for M = {M!r}; |M| must be below 1/sqrt(3)")
    return fp


def bifurcation_lambda(k: int, L: float, M: float) -> float:
    """lambda_k = k^2 pi^2 / (L^2 f'(M))."""
    _check_k(k)
    if not L > 0:
        raise ValueError("L must be positive")
    fp = _check_regime(M)
    return (k * math.pi / L) ** 2 / fp


def critical_length(k: int, M: float) -> float | None:
    """L* = (k pi / sqrt 2) (1 - 3M^2) / sqrt(1 - 5M^2); ``None`` for |M| >= 1/sqrt(5)."""
    _check_k(k)
    den = 1.0 - 5.0 * M * M
    if not den > 0.0:
        return None
    # k multiplies last so that critical_length(k, M) == k * critical_length(1, M) exactly
    return k * (math.pi / math.sqrt(2.0) * (1.0 - 3.0 * M * M) / math.sqrt(den))


def _bracket(k, L, M):
    # 3 k^2 pi^2 f'^2 + L^2 f''' f' + (L^2/3) f''^2
    fp = bulk_force_deriv(1, M)
    return (3.0 * (k * math.pi) ** 2 * fp * fp + L * L * bulk_force_deriv(3, M) * fp
            + L * L / 3.0 * bulk_force_deriv(2, M) ** 2)


def h_coefficients(k: int, L: float, M: float) -> tuple[float, float]:
    """Return ``(h_yyy, h_lambda_y)`` of the reduced bifurcation equation."""
    _check_k(k)
    fp = _check_regime(M)
    kp2 = (k * math.pi) ** 2
    h_yyy = 3.0 * kp2 / (4.0 * L**3 * fp * fp) * _bracket(k, L, M)
    return h_yyy, L * fp


def classify(k: int, L: float, M: float) -> PitchforkClass:
    """Direction of the k-th pitchfork, taken from the sign of h_yyy.

    With ``h_lambda_y > 0`` a positive cubic coefficient gives a subcritical
    branch.  ``h_yyy == 0`` or ``L`` numerically at ``L*`` is reported as
    Subcritical with ``degenerate=True``.
    """
    _check_k(k)
    if not L > 0:
        raise ValueError("L must be positive")
    if not abs(M) < SPINODAL:
        return PitchforkClass(PitchforkKind.NO_BIFURCATION, k, L, M)
    h_yyy, h_ly = h_coefficients(k, L, M)
    lstar = critical_length(k, M)
    degenerate = h_yyy == 0.0 or (lstar is not None and abs(L - lstar) <= DEGENERATE_RTOL * lstar)
    kind = PitchforkKind.SUPERCRITICAL if (h_yyy < 0.0 and not degenerate) else PitchforkKind.SUBCRITICAL
    return PitchforkClass(kind, k, L, M, bifurcation_lambda(k, L, M), h_yyy, h_ly, lstar, degenerate)


def trivial_line_a(M: float) -> float:
    """Value of the nonlocal constant a along the trivial solutions: f(M)."""
    return M - M**3


def bifurcation_point_curve(lam: float, L: float) -> float:
    """a_b(lambda): the level a = f(M) at which mode 1 bifurcates at this lambda.

    Eliminating M from ``lambda = pi^2/(L^2 (1 - 3M^2))`` and ``a = M - M^3``
    gives ``(1/(3 sqrt 3)) sqrt(1 - r) (2 + r)`` with ``r = pi^2/(L^2 lambda)``.
    """
    r = math.pi**2 / (L * L * lam)
    if r > 1.0 + 1e-12:
        raise BelowFirstBifurcation(f"lambda = {lam!r} is below pi^2/L^2 = {math.pi**2 / L**2:.6g}")
    r = min(r, 1.0)  # rounding at the onset itself
    return math.sqrt(1.0 - r) * (2.0 + r) / (3.0 * math.sqrt(3.0))


@dataclass(frozen=True)
class ReductionReport:
    h_yyy_numeric: float
    h_lambda_y_numeric: float
    h_yyy_closed: float
    h_lambda_y_closed: float
    ode_residual: float
    nodes: int

    @property
    def closed_form_gap(self) -> float:
        """Largest gap between numeric and closed-form coefficients."""
        return max(abs(self.h_yyy_numeric - self.h_yyy_closed),
                   abs(self.h_lambda_y_numeric - self.h_lambda_y_closed))


def verify_reduction(k: int, L: float, M: float, quadrature_nodes: int | None = None) -> ReductionReport:
    """Rebuild h_yyy and h_lambda_y from the multilinear derivatives of G.

    ``d^2G`` and ``d^3G`` at ``(0, lambda_k, M)`` are applied to the kernel
    vector ``v = cos(k pi x/L)`` and paired with ``v* = 2v``; the correction
    ``l = S^{-1} E[d^2G(v, v)] = v - (f''/(6 f')) cos(2 k pi x/L)`` is checked
    against its ODE ``l'' + lambda_k f'(M) l = d^2G(v, v)`` at every node.
    All integrands are cosine polynomials of degree <= 4k in ``pi x/L``, so
    the trapezoid rule on ``max(64, 16k)`` uniform intervals is exact up to
    rounding.
    """
    _check_k(k)
    fp = _check_regime(M)
    fpp = bulk_force_deriv(2, M)
    fppp = bulk_force_deriv(3, M)
    n = quadrature_nodes or max(64, 16 * k)
    kx = k * math.pi / L
    lam = kx * kx / fp

    x = np.linspace(0.0, L, n + 1)
    w = np.full(n + 1, L / n)
    w[0] = w[-1] = 0.5 * L / n

    def integral(y):
        return float(np.dot(w, y))

    def d2G(w1, w2):
        prod = fpp * w1 * w2
        return lam * prod - lam * integral(prod) / L

    def d3G(w1, w2, w3):
        (a1, a1x, a1xx), (a2, a2x, a2xx), (a3, a3x, a3xx) = w1, w2, w3
        prod = a1 * a2 * a3
        curv = a3xx * a1x * a2x + a2xx * a1x * a3x + a1xx * a2x * a3x
        return -3.0 * curv + lam * fppp * prod - lam * fppp * integral(prod) / L

    cos1, sin1 = np.cos(kx * x), np.sin(kx * x)
    cos2 = np.cos(2.0 * kx * x)
    v = (cos1, -kx * sin1, -kx * kx * cos1)
    v_dual = 2.0 * cos1

    ratio = fpp / fp
    ell = cos1 - ratio / 6.0 * cos2
    ell_xx = -kx * kx * cos1 + ratio / 6.0 * 4.0 * kx * kx * cos2
    forcing = d2G(cos1, cos1)
    ode_residual = float(np.max(np.abs(ell_xx + lam * fp * ell - forcing)))

    cubic = integral(v_dual * d3G(v, v, v))
    correction = integral(v_dual * 3.0 * d2G(cos1, ell))
    h_yyy_num = cubic - correction
    # G_lambda vanishes on the trivial line, so only dG_lambda(v) = f'(M) v survives.
    h_ly_num = integral(v_dual * fp * cos1)

    h_yyy_cf, h_ly_cf = h_coefficients(k, L, M)
    return ReductionReport(h_yyy_num, h_ly_num, h_yyy_cf, h_ly_cf, ode_residual, n)
