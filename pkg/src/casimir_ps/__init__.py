"""Electromagnetic Casimir energy between a perfectly reflecting sphere and plane."""
from .energy import (
    ConvergenceError,
    EnergyResult,
    Geometry,
    LmaxCapError,
    SolverParams,
    casimir_ratio,
    choose_lmax,
    integrand,
    pfa_energy,
    small_sphere_energy,
    small_sphere_ratio,
)
from .roundtrip import SingularBlockError

__version__ = "0.1.0"
