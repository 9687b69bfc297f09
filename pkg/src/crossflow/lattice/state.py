from __future__ import annotations

from dataclasses import dataclass, field
from enum import Enum, IntEnum
from typing import Any

import numpy as np

from crossflow.core.exceptions import ParameterError


class Species(IntEnum):
    EMPTY = 0
    RED = 1
    BLUE = 2


class Scheduler(str, Enum):
    """Update order of one lattice step."""

    SYNCHRONOUS = "synchronous"
    RANDOM_SEQUENTIAL = "random_sequential"


def _freeze(grid: np.ndarray) -> np.ndarray:
    out = np.array(grid, dtype=np.int8, copy=True)
    out.setflags(write=False)
    return out


@dataclass(frozen=True, eq=False)
class LatticeState:
    """Occupancy of an ``N x N`` periodic lattice plus the generator state.

    ``grid[i, j]`` holds a :class:`Species` code; ``i`` runs along x (the red
    walking direction) and ``j`` along y (the blue walking direction). The
    array is stored read-only.
    """

    grid: np.ndarray
    step_count: int = 0
    rng_state: dict[str, Any] = field(default_factory=lambda: np.random.PCG64(0).state)

    def __post_init__(self) -> None:
        g = np.asarray(self.grid)
        if g.ndim != 2 or g.shape[0] != g.shape[1]:
            raise ParameterError(f"Lattice grid must be square, got shape {g.shape}.")
        if g.shape[0] < 2:
            raise ParameterError("Lattice needs at least 2 cells per axis.")
        if g.size and (g.min() < Species.EMPTY or g.max() > Species.BLUE):
            raise ParameterError("Lattice cells must hold 0 (empty), 1 (red) or 2 (blue).")
        object.__setattr__(self, "grid", _freeze(g))

    @classmethod
    def random_placement(
        cls,
        n: int,
        density: float,
        seed: int,
        red_fraction: float = 0.5,
    ) -> "LatticeState":
        """Place ``round(density * n^2)`` walkers uniformly without overlap.

        ``round(red_fraction * P)`` of them are red, the rest blue.
        """
        if not 0.0 <= density <= 1.0:
            raise ParameterError(f"Total density must lie in [0, 1], got {density}.")
        if not 0.0 <= red_fraction <= 1.0:
            raise ParameterError(f"red_fraction must lie in [0, 1], got {red_fraction}.")
        bitgen = np.random.PCG64(seed)
        rng = np.random.Generator(bitgen)
        total = int(round(density * n * n))
        n_red = int(round(red_fraction * total))
        cells = rng.choice(n * n, size=total, replace=False)
        flat = np.zeros(n * n, dtype=np.int8)
        flat[cells[:n_red]] = Species.RED
        flat[cells[n_red:]] = Species.BLUE
        return cls(grid=flat.reshape(n, n), step_count=0, rng_state=bitgen.state)

    @property
    def n(self) -> int:
        return int(self.grid.shape[0])

    def generator(self) -> np.random.Generator:
        """A fresh generator positioned at the stored state."""
        bitgen = np.random.PCG64()
        bitgen.state = self.rng_state
        return np.random.Generator(bitgen)

    def count(self, species: Species) -> int:
        return int(np.count_nonzero(self.grid == species))

    @property
    def red_count(self) -> int:
        return self.count(Species.RED)

    @property
    def blue_count(self) -> int:
        return self.count(Species.BLUE)

    def same_as(self, other: "LatticeState") -> bool:
        """Grid, step count and generator state all identical."""
        return (
            self.step_count == other.step_count
            and np.array_equal(self.grid, other.grid)
            and self.rng_state == other.rng_state
        )

    def transposed_swapped(self) -> "LatticeState":
        """Transpose the grid and exchange red and blue."""
        g = self.grid.T
        swapped = np.where(g == Species.RED, Species.BLUE, np.where(g == Species.BLUE, Species.RED, 0))
        return LatticeState(grid=swapped, step_count=self.step_count, rng_state=self.rng_state)


def lattice_to_density(state: LatticeState) -> tuple[np.ndarray, np.ndarray]:
    """Indicator fields ``(r, b)`` of a lattice state as float arrays."""
    r = (state.grid == Species.RED).astype(float)
    b = (state.grid == Species.BLUE).astype(float)
    return r, b
