"""Classical stationary solutions through the time map of the ancillary problem.

A monotone piece of a classical solution is an orbit of the first-order
system running from ``(u_min, 0)`` to ``(u_max, 0)`` on the level set
``1/sqrt(1 + v^2) = g(u)`` with ``g(u) = 1 + lam*(h(u_min) - h(u))`` and
``h(u) = a*u - F(u)``.  Its x-length and mean follow from quadrature in u;
requiring length ``L/n`` and mean ``M`` gives two equations in
``(lam, a, u_min)`` whose solution curve is the branch of n-inflection
solutions.  The branch ends where ``g(c) = 0``: the gradient is infinite at
the centre and the solution stops being classical.
"""

from __future__ import annotations

import enum
import functools
import math
from dataclasses import dataclass, field

import numpy as np
from numpy.polynomial.legendre import leggauss
from scipy.interpolate import make_interp_spline
from scipy.optimize import brentq

from .errors import (
    BelowOnset,
    BlowUp,
    NoClassicalSolution,
    NoConvergence,
    NoRoot,
    NoTurningPoint,
    SeedFailure,
)
from .local_bifurcation import PitchforkKind, bifurcation_lambda, classify, trivial_line_a
from .model import F_MAX, bulk_force, flux, level_potential
from .phase_plane import confinement_values, equilibria, loop_break_lambda

# Quadrature order doubling starts here and stops at the cap.
GL_START = 32
GL_MAX = 2048
QUAD_RTOL = 1e-10
# g(c) may dip this far below zero at a polished terminal level.
TERMINAL_SLACK = 1e-12


@functools.lru_cache(maxsize=None)
def _theta_rule(order):
    # Gauss-Legendre nodes mapped to [0, pi]
    x, w = leggauss(order)
    return 0.5 * math.pi * (x + 1.0), 0.5 * math.pi * w


def g_function(u, lam, a, u_min):
    """1/sqrt(1 + v^2) along the level through ``(u_min, 0)``."""
    return 1.0 + lam * (level_potential(u_min, a) - level_potential(u, a))


def _turning_cubic(u, u_min, a):
    # (P(u) - P(u_min)) / (u - u_min) with P(u) = u^4 - 2u^2 + 4a u
    return u**3 + u_min * u * u + (u_min * u_min - 2.0) * u + (u_min**3 - 2.0 * u_min + 4.0 * a)


def turning_point(lam, a, u_min, *, terminal=False):
    """Right endpoint ``u_max > c`` with ``g(u_max) = 1``.

    Raises :class:`BlowUp` when ``g(c) <= 0``: the orbit reaches ``|v| = inf``
    at the centre before it can turn.  With ``terminal=True`` the limiting
    level ``g(c) = 0`` (up to rounding) is accepted.  Raises
    :class:`NoTurningPoint` when the level escapes past the outer saddle.
    """
    eq = equilibria(a)
    if u_min > eq.c:
        raise ValueError(f"u_min = {u_min!r} must not exceed the centre c = {eq.c!r}")
    if u_min == eq.c:
        return eq.c
    if not u_min > eq.u_l:
        raise NoTurningPoint(f"u_min = {u_min!r} lies at or beyond the left saddle {eq.u_l!r}")
    gc = g_function(eq.c, lam, a, u_min)
    # the rounding of g = 1 + lam*(...) grows with lam
    if gc < -TERMINAL_SLACK * (1.0 + lam) if terminal else gc <= 0.0:
        raise BlowUp(f"g(c) = {gc:.3e} <= 0: infinite gradient at u = c")
    if _turning_cubic(eq.u_r, u_min, a) >= 0.0:
        raise NoTurningPoint("the level through u_min does not return to v = 0 before the saddle")
    return brentq(_turning_cubic, eq.c, eq.u_r, args=(u_min, a), xtol=1e-15,
                  rtol=4 * np.finfo(float).eps, maxiter=200)


def _dx_dtheta(theta, lam, a, u_min, u_max):
    """dx/dtheta under ``u = m - h cos(theta)`` with the endpoint zeros cancelled.

    ``1 - g = (lam/4)(P(u) - P(u_min)) = (u - u_min)(u_max - u) s(u)`` with
    ``s(u) = -(lam/4)(u^2 + S u + R)``, so dx/du = g / sqrt((1-g)(1+g))
    times ``h sin(theta)`` becomes ``g / sqrt(s (2 - phi))``, smooth in theta.
    """
    m = 0.5 * (u_min + u_max)
    h = 0.5 * (u_max - u_min)
    u = m - h * np.cos(theta)
    S = u_min + u_max
    R = S * S - u_min * u_max - 2.0
    s = -0.25 * lam * (u * u + S * u + R)
    g = g_function(u, lam, a, u_min)
    phi = 1.0 - g
    return u, g / np.sqrt(s * (2.0 - phi))


def piece_length_and_mass(lam, a, u_min, *, terminal=False, rtol=QUAD_RTOL):
    """x-length and mean of the monotone piece from ``u_min`` to its turning point.

    Gauss-Legendre in theta with the order doubled until both quantities
    change by at most ``rtol`` relatively.

    Returns
    -------
    (length, mass) : tuple of float

    Raises
    ------
    BlowUp, NoTurningPoint
        When the level does not describe a classical monotone piece.
    """
    u_max = turning_point(lam, a, u_min, terminal=terminal)
    return _length_and_mass(lam, a, u_min, u_max, rtol)


def _length_and_mass(lam, a, u_min, u_max, rtol=QUAD_RTOL):
    prev = None
    order = GL_START
    while order <= GL_MAX:
        theta, w = _theta_rule(order)
        u, j = _dx_dtheta(theta, lam, a, u_min, u_max)
        length = float(np.dot(w, j))
        mass = float(np.dot(w, j * u)) / length
        if prev is not None:
            dl = abs(length - prev[0]) / abs(length)
            dm = abs(mass - prev[1]) / max(abs(mass), 1.0)
            if dl <= rtol and dm <= rtol:
                return length, mass
        prev = (length, mass)
        order *= 2
    raise NoConvergence(f"time-map quadrature did not settle below rtol={rtol:g} at order {GL_MAX}")


# ---------------------------------------------------------------------------
# profiles


@dataclass(frozen=True)
class StationaryProfile:
    """A classical stationary solution on (0, L) built from one monotone piece.

    ``x, u, v`` sample the tiled solution: the piece is reflected n times so
    that ``u(0) = u_max`` and the profile first decreases.  ``residual`` is
    the largest pointwise defect of ``(psi(u_x))_x + lam (f(u) - a)`` on the
    samples, differentiated by a quintic spline.
    """

    lam: float
    a: float
    u_min: float
    u_max: float
    energy_C: float
    length: float
    mass: float
    L: float
    n: int
    x: np.ndarray = field(repr=False)
    u: np.ndarray = field(repr=False)
    v: np.ndarray = field(repr=False)
    residual: float = float("nan")

    @property
    def inflections(self) -> int:
        return self.n

    @property
    def amplitude(self) -> float:
        return 0.5 * (self.u_max - self.u_min)

    def reflected(self) -> "StationaryProfile":
        """The mirror image ``u(L - x)``, also a stationary solution."""
        return StationaryProfile(self.lam, self.a, self.u_min, self.u_max, self.energy_C,
                                 self.length, self.mass, self.L, self.n,
                                 (self.L - self.x[::-1]).copy(), self.u[::-1].copy(),
                                 -self.v[::-1], self.residual)

    def interpolate(self, x):
        """Linear interpolation of ``u`` at arbitrary points of [0, L]."""
        return np.interp(x, self.x, self.u)


def _piece_samples(lam, a, u_min, u_max, samples, sub_order=8):
    theta = np.linspace(0.0, math.pi, samples)
    # x(theta) by Gauss-Legendre on each theta cell
    t, w = leggauss(sub_order)
    half = 0.5 * (theta[1] - theta[0])
    mids = 0.5 * (theta[1:] + theta[:-1])
    nodes = mids[:, None] + half * t[None, :]
    _, j = _dx_dtheta(nodes, lam, a, u_min, u_max)
    x = np.concatenate(([0.0], np.cumsum(half * (j @ w))))
    u = 0.5 * (u_min + u_max) - 0.5 * (u_max - u_min) * np.cos(theta)
    g = g_function(u, lam, a, u_min)
    phi = np.clip(1.0 - g, 0.0, None)
    v = np.sqrt(phi * (2.0 - phi)) / g
    v[0] = v[-1] = 0.0
    return x, u, v


def _stationary_defect(x, u, v, lam, a):
    psi = flux(v)
    dpsi = make_interp_spline(x, psi, k=5).derivative()(x)
    return float(np.max(np.abs(dpsi + lam * (bulk_force(u) - a))))


def build_profile(lam, a, u_min, L=None, n=1, samples=401):
    """Reconstruct the tiled profile for a known level ``(lam, a, u_min)``.

    ``L`` is recorded as metadata; by default it is ``n`` times the piece
    length.
    """
    u_max = turning_point(lam, a, u_min)
    length, mass = _length_and_mass(lam, a, u_min, u_max)
    xp, up, vp = _piece_samples(lam, a, u_min, u_max, samples)
    residual = _stationary_defect(xp, up, vp, lam, a) if u_max > u_min else 0.0
    # keep the piece exactly length-consistent with the adaptive quadrature
    xp = xp * (length / xp[-1]) if xp[-1] > 0 else xp

    xs, us, vs = [], [], []
    for j in range(n):
        if j % 2 == 0:
            xj, uj, vj = j * length + (length - xp[::-1]), up[::-1], -vp[::-1]
        else:
            xj, uj, vj = j * length + xp, up, vp
        if j > 0:
            xj, uj, vj = xj[1:], uj[1:], vj[1:]
        xs.append(xj)
        us.append(uj)
        vs.append(vj)
    x = np.concatenate(xs)
    x[-1] = n * length
    energy = 1.0 + lam * level_potential(u_min, a)
    L = n * length if L is None else L
    return StationaryProfile(lam, a, u_min, u_max, energy, length, mass, L, n,
                             x, np.concatenate(us), np.concatenate(vs), residual)


# ---------------------------------------------------------------------------
# branches


class Termination(str, enum.Enum):
    BLOW_UP = "BlowUp"
    REACHED_LAMBDA_MAX = "ReachedLambdaMax"
    REACHED_LAMBDA_MIN = "ReachedLambdaMin"
    REACHED_TRIVIAL = "ReachedTrivial"


@dataclass(frozen=True)
class BranchPoint:
    """One solution on a branch; ``u_at_0 = u_max`` by the tiling convention."""

    lam: float
    a: float
    u_min: float
    u_max: float

    @property
    def u_at_0(self) -> float:
        return self.u_max

    @property
    def amplitude(self) -> float:
        return 0.5 * (self.u_max - self.u_min)


@dataclass(frozen=True)
class Fold:
    lam: float
    a: float


@dataclass
class Branch:
    """Ordered continuation samples from the bifurcation point outwards.

    ``endpoint`` is the polished limiting level ``g(c) = 0`` when the branch
    ends by blow-up; ``bracket`` holds the last classical lambda and
    ``lambda_n`` (their gap is the bracketing width).
    """

    L: float
    M: float
    mode: int
    points: list[BranchPoint]
    termination: Termination
    lambda_n: float | None = None
    endpoint: BranchPoint | None = None
    bracket: tuple[float, float] | None = None
    folds: list[Fold] = field(default_factory=list)

    @property
    def lambdas(self) -> np.ndarray:
        return np.array([p.lam for p in self.points])

    @property
    def a_values(self) -> np.ndarray:
        return np.array([p.a for p in self.points])


@dataclass(frozen=True)
class StepControl:
    """Pseudo-arclength step sizes in the (lam, a, d) space, ``d = c(a) - u_min``."""

    ds_initial: float = 0.02
    ds_max: float = 0.05
    ds_min: float = 1e-6
    seed_amplitude: float = 1e-3
    newton_tol: float = 1e-11
    newton_maxiter: int = 12
    bracket_width: float = 1e-4
    max_steps: int = 5000


def _fd_step(x):
    return 1e-7 * max(1.0, abs(x))


class _System:
    """Residual of (length, mean) for a piece of length L/n and mean M."""

    def __init__(self, L, M, n):
        self.piece = L / n
        self.M = M

    def level(self, y):
        lam, a, d = y
        return equilibria(a).c - d

    def residual(self, y, terminal=False):
        lam, a, d = y
        if d < 0.0:
            raise ValueError("negative amplitude")
        length, mass = piece_length_and_mass(lam, a, self.level(y), terminal=terminal)
        return np.array([length / self.piece - 1.0, mass - self.M])

    def jacobian(self, y, r0):
        jac = np.empty((2, 3))
        for j in range(3):
            h = _fd_step(y[j])
            yp = y.copy()
            yp[j] += h
            try:
                jac[:, j] = (self.residual(yp) - r0) / h
            except (NoClassicalSolution, ValueError):
                ym = y.copy()
                ym[j] -= h
                jac[:, j] = (r0 - self.residual(ym)) / h
        return jac


def _tangent(jac, prev=None):
    t = np.cross(jac[0], jac[1])
    norm = np.linalg.norm(t)
    if norm == 0.0 or not np.isfinite(norm):
        raise NoConvergence("singular branch Jacobian")
    t /= norm
    if prev is not None and np.dot(t, prev) < 0.0:
        t = -t
    return t


def _correct(system, y_pred, t, ctl):
    """Newton on R(y) = 0 with the hyperplane constraint ``t . (y - y_pred) = 0``."""
    y = y_pred.copy()
    for _ in range(ctl.newton_maxiter):
        r = system.residual(y)
        plane = float(np.dot(t, y - y_pred))
        if np.max(np.abs(r)) <= ctl.newton_tol and abs(plane) <= ctl.newton_tol:
            return y, system.jacobian(y, r)
        jac = system.jacobian(y, r)
        A = np.vstack([jac, t])
        dy = np.linalg.solve(A, -np.concatenate([r, [plane]]))
        y = y + dy
        if not np.all(np.isfinite(y)):
            break
    raise NoConvergence("corrector did not converge")


def _terminal_solve(system, lam, a, ctl, maxiter=40):
    """Polish the blow-up point: ``u_min = u*(lam, a)`` so that ``g(c) = 0``."""

    def resid(p):
        lam_, a_ = p
        u_star, _ = confinement_values(lam_, a_)
        d = equilibria(a_).c - u_star
        return system.residual(np.array([lam_, a_, d]), terminal=True), d

    p = np.array([lam, a], dtype=float)
    r, d = resid(p)
    for _ in range(maxiter):
        if np.max(np.abs(r)) <= ctl.newton_tol:
            return p, d
        jac = np.empty((2, 2))
        for j in range(2):
            h = _fd_step(p[j]) * (1e-1 if j == 1 else 1.0)
            q = p.copy()
            q[j] += h
            jac[:, j] = (resid(q)[0] - r) / h
        step = np.linalg.solve(jac, -r)
        scale = 1.0
        while scale > 1e-6:
            try:
                rn, dn = resid(p + scale * step)
            except (NoClassicalSolution, ValueError):
                scale *= 0.5
                continue
            if np.max(np.abs(rn)) < np.max(np.abs(r)) or scale < 1e-3:
                break
            scale *= 0.5
        else:
            break
        p, r, d = p + scale * step, rn, dn
    if np.max(np.abs(r)) <= 1e3 * ctl.newton_tol:
        return p, d
    raise NoConvergence("terminal blow-up point did not converge")


def _fold_vertex(s, lam, a):
    """Vertex of the parabola lam(s) through three samples, with a(s) there."""
    cl = np.polyfit(s, lam, 2)
    ca = np.polyfit(s, a, 2)
    if cl[0] == 0.0:
        i = int(np.argmax(np.abs(np.asarray(lam) - lam[0])))
        return Fold(float(lam[i]), float(a[i]))
    sv = -cl[1] / (2.0 * cl[0])
    sv = min(max(sv, s[0]), s[-1])
    return Fold(float(np.polyval(cl, sv)), float(np.polyval(ca, sv)))


def _point(system, y):
    u_min = system.level(y)
    lam, a, _ = y
    return BranchPoint(float(lam), float(a), float(u_min), float(turning_point(lam, a, u_min)))


def trace_branch(L, M, n=1, lambda_range=(1e-3, 1e3), control: StepControl | None = None,
                 seed=None) -> Branch:
    """Follow the branch of classical n-inflection solutions until it ends.

    Parameters
    ----------
    L, M : float
        Interval length and prescribed mean.
    n : int
        Number of inflection points; each monotone piece has length L/n.
    lambda_range : (float, float)
        The trace stops if lambda leaves this window.
    control : StepControl, optional
    seed : (lam, a, u_min), optional
        Start from a known solution instead of the bifurcation point.

    Returns
    -------
    Branch
        Terminated by ``BlowUp`` (with ``lambda_n``), by leaving
        ``lambda_range`` or by returning to the trivial line.

    Raises
    ------
    SeedFailure
        If there is no pitchfork to start from or the seed does not converge.
    """
    ctl = control or StepControl()
    system = _System(L, M, n)
    lam_lo, lam_hi = lambda_range

    if seed is None:
        if classify(n, L, M).kind is PitchforkKind.NO_BIFURCATION:
            raise SeedFailure(f"no pitchfork from u = M for |M| = {abs(M)!r} >= 1/sqrt(3); supply a seed")
        lam_k = bifurcation_lambda(n, L, M)
        y0 = np.array([lam_k, trivial_line_a(M), 0.0])
        pred = y0 + np.array([0.0, 0.0, ctl.seed_amplitude])
        try:
            y, jac = _correct(system, pred, np.array([0.0, 0.0, 1.0]), ctl)
        except (NoClassicalSolution, NoConvergence, ValueError) as exc:
            raise SeedFailure(f"small-amplitude seed failed: {exc}") from exc
        points = [BranchPoint(lam_k, float(y0[1]), float(M), float(M))]
    else:
        lam_s, a_s, u_s = seed
        y0 = np.array([lam_s, a_s, equilibria(a_s).c - u_s], dtype=float)
        try:
            r = system.residual(y0)
            jac = system.jacobian(y0, r)
            t0 = _tangent(jac)
            y, jac = _correct(system, y0, t0, ctl)
        except (NoClassicalSolution, NoConvergence, ValueError) as exc:
            raise SeedFailure(f"seed did not converge: {exc}") from exc
        points = []

    t = _tangent(jac, np.array([0.0, 0.0, 1.0]))
    points.append(_point(system, y))
    arclength = [0.0] * len(points)
    ds = ctl.ds_initial
    streak = 0
    folds = []
    last_failure = None

    for _ in range(ctl.max_steps):
        if y[0] > lam_hi:
            return Branch(L, M, n, points, Termination.REACHED_LAMBDA_MAX, folds=folds)
        if y[0] < lam_lo:
            return Branch(L, M, n, points, Termination.REACHED_LAMBDA_MIN, folds=folds)
        pred = y + ds * t
        if pred[2] < 0.0 and len(points) > 2:
            return Branch(L, M, n, points, Termination.REACHED_TRIVIAL, folds=folds)
        try:
            y_new, jac_new = _correct(system, pred, t, ctl)
            if abs(y_new[2] - y[2]) > 2.0 * ds + 1e-12:
                raise NoConvergence("corrector jumped")
        except (NoClassicalSolution, NoConvergence, ValueError) as exc:
            last_failure = exc
            streak = 0
            ds *= 0.5
            if ds >= ctl.ds_min:
                continue
            break
        t_new = _tangent(jac_new, t)
        arclength.append(arclength[-1] + float(np.linalg.norm(y_new - y)))
        if np.sign(t_new[0]) != np.sign(t[0]) and t[0] != 0.0 and len(points) >= 2:
            tail = points[-2:]
            s3 = np.array(arclength[-3:])
            folds.append(_fold_vertex(s3, [tail[0].lam, tail[1].lam, y_new[0]],
                                      [tail[0].a, tail[1].a, y_new[1]]))
        y, t = y_new, t_new
        points.append(_point(system, y))
        streak += 1
        if streak >= 3:
            ds = min(2.0 * ds, ctl.ds_max)
            streak = 0
    else:
        raise NoConvergence(f"branch did not terminate within {ctl.max_steps} steps")

    try:
        p, d = _terminal_solve(system, y[0], y[1], ctl)
    except (NoClassicalSolution, NoConvergence, ValueError) as exc:
        raise NoConvergence(f"continuation stalled at lambda = {y[0]:.6g} ({last_failure}); "
                            f"no blow-up level found ({exc})") from exc
    lam_n, a_n = float(p[0]), float(p[1])
    if abs(lam_n - y[0]) > max(ctl.bracket_width, 1e-3):
        raise NoConvergence(f"continuation stalled at lambda = {y[0]:.6g} away from the blow-up "
                            f"level at {lam_n:.6g}")
    u_star = equilibria(a_n).c - d
    end = BranchPoint(lam_n, a_n, float(u_star), float(turning_point(lam_n, a_n, u_star, terminal=True)))
    return Branch(L, M, n, points, Termination.BLOW_UP, lambda_n=lam_n, endpoint=end,
                  bracket=(float(y[0]), lam_n), folds=folds)


# ---------------------------------------------------------------------------
# single solutions


def _newton_level(lam, L, M, n, a, u_min, tol=1e-11, maxiter=50):
    """Damped Newton in (a, u_min) at fixed lambda."""
    system = _System(L, M, n)

    def resid(p):
        a_, u_ = p
        return system.residual(np.array([lam, a_, equilibria(a_).c - u_]))

    p = np.array([a, u_min], dtype=float)
    try:
        r = resid(p)
    except (NoClassicalSolution, ValueError) as exc:
        raise NoConvergence(f"seed is not a classical level: {exc}") from exc
    for _ in range(maxiter):
        if np.max(np.abs(r)) <= tol:
            return p
        jac = np.empty((2, 2))
        for j in range(2):
            h = _fd_step(p[j])
            q = p.copy()
            q[j] += h
            try:
                jac[:, j] = (resid(q) - r) / h
            except (NoClassicalSolution, ValueError):
                q[j] -= 2 * h
                jac[:, j] = (r - resid(q)) / h
        try:
            step = np.linalg.solve(jac, -r)
        except np.linalg.LinAlgError as exc:
            raise NoConvergence("singular Jacobian") from exc
        scale = 1.0
        while True:
            try:
                rn = resid(p + scale * step)
                if np.max(np.abs(rn)) < (1.0 - 1e-4 * scale) * np.max(np.abs(r)):
                    break
            except (NoClassicalSolution, ValueError):
                pass
            scale *= 0.5
            if scale < 1e-8:
                raise NoConvergence(f"Newton stalled at residual {np.max(np.abs(r)):.3e}")
        p, r = p + scale * step, rn
    raise NoConvergence(f"Newton did not converge in {maxiter} iterations")


def solve_stationary(lam, L, M, n=1, seed=None, samples=401) -> StationaryProfile:
    """Classical stationary solution with n inflection points at this lambda.

    With ``seed = (a, u_min)`` a damped Newton iteration is run from the
    seed and failure raises :class:`NoConvergence`.  Without a seed the
    branch from the n-th pitchfork is traced and the first crossing of
    ``lam`` along it is refined.

    Raises
    ------
    BlowUp
        ``lam`` lies beyond every classical point of the branch
        (``lambda_n`` attached).
    BelowOnset
        ``lam`` lies below the whole branch; only the trivial state exists.
    NoConvergence
        A seeded Newton iteration failed.
    """
    if not lam > 0:
        raise ValueError("lambda must be positive")
    if seed is not None:
        a, u_min = _newton_level(lam, L, M, n, *seed)
        return build_profile(lam, a, u_min, L, n, samples)

    branch = trace_branch(L, M, n)
    pts = branch.points
    lams = branch.lambdas
    for i in range(len(pts) - 1):
        lo, hi = sorted((lams[i], lams[i + 1]))
        if lo <= lam <= hi:
            w = 0.0 if hi == lo else (lam - lams[i]) / (lams[i + 1] - lams[i])
            a0 = (1 - w) * pts[i].a + w * pts[i + 1].a
            u0 = (1 - w) * pts[i].u_min + w * pts[i + 1].u_min
            if i == 0 and pts[0].u_min == pts[0].u_max and w < 0.5:
                u0 = pts[1].u_min  # stay off the zero-amplitude point
            a, u_min = _newton_level(lam, L, M, n, a0, u0)
            return build_profile(lam, a, u_min, L, n, samples)
    if branch.termination is Termination.BLOW_UP:
        # the terminal stretch between the last point and lambda_n
        lo, hi = sorted((lams[-1], branch.lambda_n))
        if lo <= lam <= hi:
            a, u_min = _newton_level(lam, L, M, n, pts[-1].a, pts[-1].u_min)
            return build_profile(lam, a, u_min, L, n, samples)
    top = max(lams.max(), branch.lambda_n or -np.inf)
    if lam > top:
        raise BlowUp(f"no classical {n}-inflection solution for lambda = {lam:g}; the branch "
                     f"ends at lambda_{n} = {branch.lambda_n}", lambda_n=branch.lambda_n)
    raise BelowOnset(f"lambda = {lam:g} is below the {n}-inflection branch "
                     f"(lambda >= {lams.min():.6g}); only u = M exists there")


# ---------------------------------------------------------------------------
# blow-up boundary


def _terminal_length(lam, a):
    u_star, _ = confinement_values(lam, a)
    return piece_length_and_mass(lam, a, u_star, terminal=True)[0]


def blowup_lambda(a, L, max_doublings=60):
    """lambda*(a, L): the lambda at which the g(c) = 0 level has length L.

    The terminal length decreases from +inf at ``lambda_h(a)`` to 0 as
    ``lambda -> inf``; a sign change is located by geometric scanning above
    ``lambda_h(a)`` and refined with Brent's method.
    """
    if not 0.0 <= a < F_MAX:
        raise ValueError("the monotone boundary is defined for 0 <= a < 2/(3 sqrt 3)")
    lam_h = loop_break_lambda(a)

    def fn(lam):
        return _terminal_length(lam, a) - L

    hi = 2.0 * lam_h
    k = 0
    while fn(hi) > 0.0:
        hi *= 2.0
        k += 1
        if k > max_doublings:
            raise NoRoot(f"terminal length stays above L for lambda up to {hi:g}")
    lo = hi
    for j in range(1, 60):
        lo = lam_h + (hi - lam_h) * 2.0**-j
        try:
            if fn(lo) > 0.0:
                break
        except (NoConvergence, NoClassicalSolution, ValueError):
            continue  # includes lo rounding onto lambda_h itself
    else:
        raise NoRoot(f"no sign change of the terminal length above lambda_h = {lam_h:g}")
    return brentq(fn, lo, hi, xtol=1e-13, rtol=1e-13)


def blowup_boundary(L, a_samples):
    """Sample the boundary curve as ``[(lambda*(a), a), ...]``."""
    return [(blowup_lambda(float(a), L), float(a)) for a in a_samples]


def blowup_a(lam, L, a_max=F_MAX * (1.0 - 1e-6)):
    """Inverse boundary a*(lambda) by Brent's method over ``a``.

    Raises :class:`NoRoot` when ``lam < lambda*(0)`` (no blow-up level yet)
    or beyond the last resolvable ``a``.
    """
    lam0 = blowup_lambda(0.0, L)
    if lam < lam0:
        raise NoRoot(f"lambda = {lam:g} is below lambda*(0) = {lam0:.6g}")
    if lam == lam0:
        return 0.0
    hi = 0.5 * F_MAX
    while blowup_lambda(hi, L) < lam:
        hi = 0.5 * (hi + a_max)
        if a_max - hi < 1e-9:
            raise NoRoot(f"lambda = {lam:g} exceeds the resolvable boundary")
    return brentq(lambda a: blowup_lambda(a, L) - lam, 0.0, hi, xtol=1e-13)

