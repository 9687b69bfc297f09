from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from crossflow.config.schema import XI_ETA_TOL
from crossflow.core.exceptions import ParameterError
from crossflow.core.grid import Grid


def _readonly(a: np.ndarray) -> np.ndarray:
    out = np.array(a, dtype=float, copy=True)
    out.setflags(write=False)
    return out


def _check_shape(name: str, a: np.ndarray, grid: Grid) -> None:
    if a.shape != grid.shape:
        raise ParameterError(f"Field '{name}' has shape {a.shape}, grid expects {grid.shape}.")


@dataclass(frozen=True, eq=False)
class DensityField2D:
    """Cell-centered red/blue densities on a 2D grid; ``r[i, j]`` with ``i`` along x."""

    r: np.ndarray
    b: np.ndarray
    grid: Grid
    t: float = 0.0
    clamp_count: int = 0

    def __post_init__(self) -> None:
        if self.grid.dims != 2:
            raise ParameterError("DensityField2D needs a 2D grid.")
        object.__setattr__(self, "r", _readonly(self.r))
        object.__setattr__(self, "b", _readonly(self.b))
        _check_shape("r", self.r, self.grid)
        _check_shape("b", self.b, self.grid)

    @classmethod
    def uniform(cls, grid: Grid, r0: float, b0: float) -> "DensityField2D":
        return cls(np.full(grid.shape, r0), np.full(grid.shape, b0), grid)

    @property
    def rho(self) -> np.ndarray:
        return self.r + self.b

    @property
    def mass_r(self) -> float:
        return float(self.r.sum() * self.grid.cell_volume)

    @property
    def mass_b(self) -> float:
        return float(self.b.sum() * self.grid.cell_volume)

    def transposed_swapped(self) -> "DensityField2D":
        """Exchange the species and the axes."""
        return DensityField2D(self.b.T, self.r.T, self.grid, self.t, self.clamp_count)


@dataclass(frozen=True, eq=False)
class DensityField1D:
    """Cell-centered red/blue densities on a periodic line."""

    r: np.ndarray
    b: np.ndarray
    grid: Grid
    t: float = 0.0
    clamp_count: int = 0

    def __post_init__(self) -> None:
        if self.grid.dims != 1:
            raise ParameterError("DensityField1D needs a 1D grid.")
        if not self.grid.is_periodic:
            raise ParameterError("1D fields support periodic boundaries only.")
        object.__setattr__(self, "r", _readonly(self.r))
        object.__setattr__(self, "b", _readonly(self.b))
        _check_shape("r", self.r, self.grid)
        _check_shape("b", self.b, self.grid)

    @classmethod
    def uniform(cls, grid: Grid, r0: float, b0: float) -> "DensityField1D":
        return cls(np.full(grid.shape, r0), np.full(grid.shape, b0), grid)

    @property
    def rho(self) -> np.ndarray:
        return self.r + self.b

    @property
    def mass_r(self) -> float:
        return float(self.r.sum() * self.grid.h)

    @property
    def mass_b(self) -> float:
        return float(self.b.sum() * self.grid.h)

    def reflected_swapped(self) -> "DensityField1D":
        """Reflect ``x -> 1 - x`` and exchange the species."""
        return DensityField1D(self.b[::-1], self.r[::-1], self.grid, self.t, self.clamp_count)


@dataclass(frozen=True, eq=False)
class XiEtaField:
    """Vacancy ``xi = 1 - r - b`` and imbalance ``eta = r - b`` on a periodic line."""

    xi: np.ndarray
    eta: np.ndarray
    grid: Grid
    t: float = field(default=0.0)

    def __post_init__(self) -> None:
        object.__setattr__(self, "xi", _readonly(self.xi))
        object.__setattr__(self, "eta", _readonly(self.eta))
        _check_shape("xi", self.xi, self.grid)
        _check_shape("eta", self.eta, self.grid)

    @property
    def mean_xi(self) -> float:
        return float(self.xi.mean())

    @property
    def mean_eta(self) -> float:
        return float(self.eta.mean())


def to_xi_eta(s: DensityField1D) -> XiEtaField:
    return XiEtaField(1.0 - s.r - s.b, s.r - s.b, s.grid, s.t)


def from_xi_eta(x: XiEtaField, tol: float = XI_ETA_TOL) -> DensityField1D:
    """Recover ``(r, b)`` from ``(xi, eta)``.

    Raises
    ------
    ParameterError
        If ``xi`` leaves ``[0, 1]`` or ``|eta| > 1 - xi`` beyond ``tol``.
    """
    if x.xi.min() < -tol or x.xi.max() > 1.0 + tol:
        raise ParameterError("xi must lie in [0, 1].")
    excess = np.abs(x.eta) - (1.0 - x.xi)
    if excess.max() > tol:
        worst = int(np.argmax(excess))
        raise ParameterError(
            f"|eta| exceeds 1 - xi by {excess[worst]:.3e} at cell {worst}; no admissible (r, b)."
        )
    occupied = 1.0 - x.xi
    return DensityField1D((occupied + x.eta) / 2.0, (occupied - x.eta) / 2.0, x.grid, x.t)
