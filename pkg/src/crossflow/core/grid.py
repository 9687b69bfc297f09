from __future__ import annotations

from dataclasses import dataclass, field
from typing import Union

import numpy as np

from crossflow.core.exceptions import BoundaryConditionError, ParameterError


@dataclass(frozen=True)
class PeriodicBoundary:
    """Wrap-around boundaries on every axis."""

    name: str = field(default="periodic", init=False)


@dataclass(frozen=True)
class MixedBoundary:
    """Entrance/exit boundaries of the unit square.

    Red enters through ``x = 0`` with density ``inflow`` and leaves through
    ``x = 1`` with normal flux ``outflux * r``; blue does the same on
    ``y = 0`` / ``y = 1``. All remaining edges carry zero normal flux.
    """

    inflow: float = 0.1
    outflux: float = 0.8
    name: str = field(default="mixed", init=False)

    def __post_init__(self) -> None:
        if not 0.0 <= self.inflow <= 1.0:
            raise ParameterError(f"Mixed boundary inflow must lie in [0, 1], got {self.inflow}.")
        if not self.outflux >= 0.0:
            raise ParameterError(f"Mixed boundary outflux must be >= 0, got {self.outflux}.")


BoundaryDescriptor = Union[PeriodicBoundary, MixedBoundary]


@dataclass(frozen=True)
class Grid:
    """Uniform cell-centered grid on ``[0, length]`` or ``[0, length]^2``."""

    dims: int
    n: int
    length: float = 1.0
    bc: BoundaryDescriptor = field(default_factory=PeriodicBoundary)

    def __post_init__(self) -> None:
        if self.dims not in (1, 2):
            raise ParameterError(f"Grid dims must be 1 or 2, got {self.dims}.")
        if int(self.n) != self.n or self.n < 2:
            raise ParameterError(f"Grid needs n >= 2 cells per axis, got {self.n}.")
        if not self.length > 0:
            raise ParameterError(f"Grid length must be > 0, got {self.length}.")
        if isinstance(self.bc, MixedBoundary) and self.dims != 2:
            raise BoundaryConditionError("Mixed boundaries are only defined on the 2D unit square.")

    @property
    def h(self) -> float:
        return self.length / self.n

    @property
    def shape(self) -> tuple[int, ...]:
        return (self.n,) * self.dims

    @property
    def is_periodic(self) -> bool:
        return isinstance(self.bc, PeriodicBoundary)

    def cell_centers(self) -> np.ndarray:
        return (np.arange(self.n) + 0.5) * self.h

    def mesh(self) -> tuple[np.ndarray, np.ndarray]:
        """Cell-center coordinates ``(X, Y)`` indexed ``[i, j]`` with ``i`` along x."""
        c = self.cell_centers()
        return np.meshgrid(c, c, indexing="ij")

    @property
    def cell_volume(self) -> float:
        return self.h**self.dims
