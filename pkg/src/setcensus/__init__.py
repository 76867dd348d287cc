"""setcensus: count, estimate and sample labeled forests of connected structures.

The composite class under study is SET(C) for a connected class C: labeled
objects whose components all lie in C.  The package counts objects with n
vertices and N = floor(lambda*n) components exactly (big-integer coefficient
extraction), estimates the counts through the three asymptotic regimes of the
component density lambda, and draws uniform objects through a Boltzmann
sampler; the three routes cross-validate each other.
"""

from . import asymptotics, cli, exact, powerseries, sampler, species
from .errors import (
    ConstantTermError,
    DivergenceError,
    DomainError,
    FlavorMismatchError,
    InternalConsistencyError,
    ModelViolationError,
    NotSubcriticalError,
    PrecisionError,
    RetryBudgetError,
    SetCensusError,
    UnknownClassError,
    ValidationError,
)

__version__ = "0.1.0"

__all__ = [
    "asymptotics",
    "cli",
    "exact",
    "sampler",
    "powerseries",
    "species",
    "SetCensusError",
    "DomainError",
    "ValidationError",
    "UnknownClassError",
    "NotSubcriticalError",
    "DivergenceError",
    "FlavorMismatchError",
    "ConstantTermError",
    "ModelViolationError",
    "InternalConsistencyError",
    "PrecisionError",
    "RetryBudgetError",
    "__version__",
]
