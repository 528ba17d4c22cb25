"""Stationary and evolving states of a mass-conserving bistable equation with saturating flux."""

__version__ = "0.1.0"

from .errors import (  # noqa: E402
    BelowOnset,
    BlowUp,
    NoBifurcationRegime,
    NoClassicalSolution,
    NoConvergence,
    NonFinite,
    SatfluxError,
    SeedFailure,
)
from .model import ModelParams, PhasePoint  # noqa: E402

__all__ = [
    "BelowOnset",
    "BlowUp",
    "ModelParams",
    "NoBifurcationRegime",
    "NoClassicalSolution",
    "NoConvergence",
    "NonFinite",
    "PhasePoint",
    "SatfluxError",
    "SeedFailure",
    "__version__",
]
