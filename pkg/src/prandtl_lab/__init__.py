"""Numerical laboratory for the spectral instability of linearized Prandtl flow."""

from .baseflow import BaseFlow, gaussian_shear_flow
from .complexode import LAMBDA, ShootingTrajectory, TauRoot, evans_mismatch, find_tau, newton_tau
from .errors import (
    ConvergenceError,
    LabError,
    ResolutionError,
    SCViolation,
    SingularCoefficientError,
)

__all__ = [
    "BaseFlow",
    "gaussian_shear_flow",
    "LAMBDA",
    "ShootingTrajectory",
    "TauRoot",
    "evans_mismatch",
    "find_tau",
    "newton_tau",
    "ConvergenceError",
    "LabError",
    "ResolutionError",
    "SCViolation",
    "SingularCoefficientError",
]

__version__ = "0.1.0"
