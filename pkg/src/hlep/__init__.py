"""Eigenfrequencies, exceptional and diabolical points of open bosonic
systems with quadratic Hamiltonians, via Heisenberg-Langevin moments."""

__version__ = "0.1.0"

from .dynamics import (  # noqa: E402
    BasicSpectrum,
    DynamicsMatrix,
    build_dynamics_matrix,
    eigendecompose,
    two_mode_closed_form,
)
from .eppoints import detect_coalescence, moment_degeneracy_report, sweep_surface  # noqa: E402
from .model import ModeRate, QuadraticSystem, TwoModeParams, make_system, two_mode_system  # noqa: E402
from .momentspec import MomentIndex, count_frequencies, enumerate_frequencies  # noqa: E402

__all__ = [
    "BasicSpectrum",
    "DynamicsMatrix",
    "ModeRate",
    "MomentIndex",
    "QuadraticSystem",
    "TwoModeParams",
    "build_dynamics_matrix",
    "count_frequencies",
    "detect_coalescence",
    "eigendecompose",
    "enumerate_frequencies",
    "make_system",
    "moment_degeneracy_report",
    "sweep_surface",
    "two_mode_closed_form",
    "two_mode_system",
]
