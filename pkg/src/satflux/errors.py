"""Exception hierarchy shared by the solvers and the CLI."""


class SatfluxError(Exception):
    """Base class for all package errors."""


class NoBifurcationRegime(SatfluxError, ValueError):
    """Raised when f'(M) <= 0, i.e. |M| >= 1/sqrt(3); the trivial state never loses stability."""


class BelowFirstBifurcation(SatfluxError, ValueError):
    """Raised when lambda < pi^2 / L^2, below which the bifurcation-point curve is undefined."""


class OutsideBistableRange(SatfluxError, ValueError):
    """Raised when |a| >= 2/(3 sqrt 3), so f(u) = a no longer has three real roots."""


class BelowHomoclinicThreshold(SatfluxError, ValueError):
    """Raised when lambda <= lambda_h(a); the confinement values do not exist yet."""


class NoClassicalSolution(SatfluxError):
    """No classical (C^1 up to the boundary) stationary solution for these inputs."""


class BlowUp(NoClassicalSolution):
    """The orbit reaches |u_x| = infinity before turning (g(c) <= 0).

    ``lambda_n`` carries the termination value of the relevant branch when
    it is known.
    """

    def __init__(self, message="gradient blow-up", lambda_n=None):
        super().__init__(message)
        self.lambda_n = lambda_n


class NoTurningPoint(NoClassicalSolution):
    """The orbit passes beyond the outer saddle and never returns to v = 0."""


class BelowOnset(NoClassicalSolution):
    """lambda lies below every point of the branch: only the trivial state exists."""


class NoConvergence(SatfluxError):
    """A Newton or continuation iteration stalled (a solver failure, not an existence result)."""


class SeedFailure(SatfluxError):
    """The small-amplitude seed of a branch could not be converged."""


class NoRoot(SatfluxError):
    """A bracketed root search found no sign change in the scanned window."""


class NonFinite(SatfluxError, FloatingPointError):
    """The explicit scheme produced a non-finite value (time step too large)."""
