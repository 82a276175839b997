"""Dynamical-decoupling simulation and average-Hamiltonian verification."""

from .errors import (BranchAmbiguityError, ConfigError, DDSimError, DimensionError,
                     DomainError, ParameterError, ResourceError)
from .pauli import PauliString, PauliSum, commutator, conjugate, equals_zero, multiply, to_matrix

__version__ = "0.1.0"

__all__ = [
    "BranchAmbiguityError", "ConfigError", "DDSimError", "DimensionError",
    "DomainError", "ParameterError", "ResourceError",
    "PauliString", "PauliSum", "commutator", "conjugate", "equals_zero",
    "multiply", "to_matrix",
]
