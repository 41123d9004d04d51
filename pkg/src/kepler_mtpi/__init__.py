"""Exactly conservative constant-angular-increment integration of the Kepler problem.

Modules: :mod:`.core` (model and first integrals), :mod:`.mtpi` (the
conservative integrator), :mod:`.baselines` (RK4, leapfrog, 4th-order
composition, reference oracle), :mod:`.anomaly` (anomalies, Kepler
equation, epochs), :mod:`.diagnostics` (error metrics) and :mod:`.bench`
(experiment harness behind the ``kepler-mtpi`` command).
"""
from .core import FirstIntegrals, PhaseState, PhysParams, Vec3
from .errors import (
    ConfigError,
    ConvergenceError,
    DegenerateOrbitError,
    DegenerateReferenceError,
    DomainError,
    KeplerError,
    SingularityError,
    StepCollapseError,
    StepTooLargeError,
)
from .kernels import BACKEND

__version__ = "0.1.0"

__all__ = [
    "BACKEND",
    "ConfigError",
    "ConvergenceError",
    "DegenerateOrbitError",
    "DegenerateReferenceError",
    "DomainError",
    "FirstIntegrals",
    "KeplerError",
    "PhaseState",
    "PhysParams",
    "SingularityError",
    "StepCollapseError",
    "StepTooLargeError",
    "Vec3",
]
