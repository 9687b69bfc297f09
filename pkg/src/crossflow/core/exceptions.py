# src/crossflow/core/exceptions.py
from __future__ import annotations

from dataclasses import dataclass
from typing import Optional


class CrossflowError(Exception):
    """Base error for every failure raised by crossflow."""


class ParameterError(CrossflowError, ValueError):
    """Raised when model parameters, grids or boundary values violate an invariant."""


class BoundaryConditionError(ParameterError):
    """Raised when a boundary descriptor is not supported by the requested solver mode."""


class LatticeError(CrossflowError, ValueError):
    """Raised when a lattice query targets a cell holding the wrong species."""


@dataclass
class ConfigError(CrossflowError):
    """Raised when a scenario file is malformed, has unknown keys or invalid values."""

    message: str
    line: Optional[int] = None

    def __str__(self) -> str:
        if self.line is None:
            return self.message
        return f"line {self.line}: {self.message}"


class SolverAbortError(CrossflowError):
    """Base error for a numerical run that had to stop."""


class DensityBoundsError(SolverAbortError):
    """Raised when a density leaves [0, 1] (or r + b exceeds 1) beyond tolerance."""


class NonFiniteStateError(SolverAbortError):
    """Raised when a solver state contains NaN or infinite values."""


class BoxViolationError(SolverAbortError):
    """Raised when a compartment update leaves the admissible box."""
