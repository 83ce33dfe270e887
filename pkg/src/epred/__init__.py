"""Euler-Poincare reduction on homogeneous spaces: symmetry checks and solvers."""

from .dynamics import EquationFamily, conservation_report, conserved_quantities, ep_residual, integrate
from .systems import SYSTEM_NAMES, build_system

__all__ = [
    "EquationFamily",
    "SYSTEM_NAMES",
    "build_system",
    "conservation_report",
    "conserved_quantities",
    "ep_residual",
    "integrate",
]

__version__ = "0.1.0"
