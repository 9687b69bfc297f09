from __future__ import annotations

from dataclasses import dataclass
from enum import Enum

import numpy as np

from crossflow.core.exceptions import BoundaryConditionError
from crossflow.core.grid import BoundaryDescriptor, MixedBoundary, PeriodicBoundary


class Mode(str, Enum):
    HYPERBOLIC = "hyperbolic"
    PARABOLIC = "parabolic"


@dataclass(frozen=True)
class GhostCells:
    """Densities padded with one ghost layer on every side (``(n + 2) x (n + 2)``)."""

    r: np.ndarray
    b: np.ndarray
    bc: BoundaryDescriptor


def apply_boundary(r: np.ndarray, b: np.ndarray, bc: BoundaryDescriptor, mode: Mode) -> GhostCells:
    """Fill ghost cells for the given boundary descriptor.

    Periodic ghosts are wrap-around copies. For mixed boundaries the red
    ghost column at ``x = 0`` and the blue ghost row at ``y = 0`` hold the
    inflow density; all other ghosts copy the adjacent cell. Fluxes on exit
    and wall faces are imposed separately by :func:`impose_boundary_fluxes`.

    Raises
    ------
    BoundaryConditionError
        For mixed boundaries in hyperbolic mode.
    """
    mode = Mode(mode)
    if isinstance(bc, PeriodicBoundary):
        return GhostCells(np.pad(r, 1, mode="wrap"), np.pad(b, 1, mode="wrap"), bc)
    if isinstance(bc, MixedBoundary):
        if mode is Mode.HYPERBOLIC:
            raise BoundaryConditionError("Mixed boundaries are only supported in parabolic mode.")
        rp = np.pad(r, 1, mode="edge")
        bp = np.pad(b, 1, mode="edge")
        rp[0, :] = bc.inflow
        bp[:, 0] = bc.inflow
        return GhostCells(rp, bp, bc)
    raise BoundaryConditionError(f"Unsupported boundary descriptor {bc!r}.")


def impose_boundary_fluxes(
    r: np.ndarray,
    b: np.ndarray,
    red_x: np.ndarray,
    red_y: np.ndarray,
    blue_x: np.ndarray,
    blue_y: np.ndarray,
    bc: BoundaryDescriptor,
) -> None:
    """Overwrite boundary-face fluxes in place (mixed boundaries only).

    Red: ``outflux * r`` through ``x = 1``, zero through ``y = 0`` and ``y = 1``.
    Blue: ``outflux * b`` through ``y = 1``, zero through ``x = 0`` and ``x = 1``.
    Entrance faces keep the flux computed from the inflow ghosts.
    """
    if not isinstance(bc, MixedBoundary):
        return
    red_x[-1, :] = bc.outflux * r[-1, :]
    red_y[:, 0] = 0.0
    red_y[:, -1] = 0.0
    blue_y[:, -1] = bc.outflux * b[:, -1]
    blue_x[0, :] = 0.0
    blue_x[-1, :] = 0.0
