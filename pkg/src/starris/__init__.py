"""STAR-RIS phase-shift design under statistical CSI and Von Mises phase
noise, via Riemannian conjugate gradient on the complex circle manifold."""

__version__ = "0.1.0"

from .channel import (
    ChannelSet,
    MODES,
    PhaseNoiseRealization,
    PhaseProfile,
    SystemConfig,
    default_config,
)
from .circular import VonMisesParams, bessel_i, concentration_factor, sample_von_mises
from .manifold import SolverTrace, solve_rcg
from .objective import ObjectiveContext, build_context, cost, optimize_phases
from .simulator import SchemeSummary, evaluate_scheme, random_phase_baseline
from .statcsi import ClosedFormTerms, expected_effective_entry

__all__ = [
    "__version__",
    "MODES",
    "ChannelSet",
    "ClosedFormTerms",
    "ObjectiveContext",
    "PhaseNoiseRealization",
    "PhaseProfile",
    "SchemeSummary",
    "SolverTrace",
    "SystemConfig",
    "VonMisesParams",
    "bessel_i",
    "build_context",
    "concentration_factor",
    "cost",
    "default_config",
    "evaluate_scheme",
    "expected_effective_entry",
    "optimize_phases",
    "random_phase_baseline",
    "sample_von_mises",
    "solve_rcg",
]
