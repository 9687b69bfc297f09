from __future__ import annotations

from abc import ABC, abstractmethod
from typing import Any, Iterable, Optional

import numpy as np
from scipy import fft as sp_fft

from crossflow.core.grid import Grid
from crossflow.diagnostics.entropy import EntropyConfig, entropy_1d, entropy_2d, lyapunov_relative
from crossflow.diagnostics.patterns import coarse_grain, diagonal_anisotropy, diagonal_mode, segregation_index
from crossflow.lattice.state import LatticeState, lattice_to_density
from crossflow.pde.fields import DensityField1D, XiEtaField, to_xi_eta

Values = dict[str, Optional[float]]


def _densities(state: Any) -> tuple[np.ndarray, np.ndarray, float]:
    """``(r, b, cell_volume)`` for any run state; a lattice cell has volume 1."""
    if isinstance(state, LatticeState):
        r, b = lattice_to_density(state)
        return r, b, 1.0
    return state.r, state.b, state.grid.cell_volume


class BaseObserver(ABC):
    """Base class for all diagnostics observers."""

    @abstractmethod
    def observe(self, state: Any, t: float) -> Values:
        """Return the observed values, keyed by diagnostics column."""
        raise NotImplementedError


class ObserverSet:
    """Ordered collection of observers evaluated on the same state."""

    def __init__(self, observers: Iterable[BaseObserver]) -> None:
        self.observers = list(observers)

    def collect(self, state: Any, t: float) -> Values:
        values: Values = {}
        for observer in self.observers:
            values.update(observer.observe(state, t))
        return values


class MassObserver(BaseObserver):
    def observe(self, state: Any, t: float) -> Values:
        r, b, vol = _densities(state)
        return {"M_r": float(r.sum() * vol), "M_b": float(b.sum() * vol)}


class SegregationObserver(BaseObserver):
    def observe(self, state: Any, t: float) -> Values:
        return {"segregation": segregation_index(state)}


class AnisotropyObserver(BaseObserver):
    """Diagonal anisotropy of the red (default) or blue density.

    ``coarse`` block-averages the field first, which is how lattice
    occupancies are turned into density fields.
    """

    def __init__(self, species: str = "r", coarse: int = 1) -> None:
        if species not in ("r", "b"):
            raise ValueError(f"species must be 'r' or 'b', got {species!r}.")
        self.species = species
        self.coarse = coarse

    def _field(self, state: Any) -> np.ndarray:
        r, b, _ = _densities(state)
        f = r if self.species == "r" else b
        return coarse_grain(f, self.coarse) if self.coarse > 1 else f

    def observe(self, state: Any, t: float) -> Values:
        return {"anisotropy": diagonal_anisotropy(self._field(state))}


class DiagonalPhaseObserver(AnisotropyObserver):
    """Records the dominant diagonal mode and its phase (extra columns)."""

    def observe(self, state: Any, t: float) -> Values:
        mode = diagonal_mode(self._field(state))
        return {"diag_kx": float(mode.kx), "diag_ky": float(mode.ky), "diag_phase": mode.phase}


class Entropy2DObserver(BaseObserver):
    def __init__(self, cfg: EntropyConfig) -> None:
        self.cfg = cfg

    def observe(self, state: Any, t: float) -> Values:
        return {"entropy": entropy_2d(state, self.cfg)}


def _as_xi_eta(state: Any) -> XiEtaField:
    return state if isinstance(state, XiEtaField) else to_xi_eta(state)


class Entropy1DObserver(BaseObserver):
    def __init__(self, cfg: Optional[EntropyConfig] = None) -> None:
        self.cfg = cfg

    def observe(self, state: Any, t: float) -> Values:
        return {"entropy": entropy_1d(_as_xi_eta(state), self.cfg)}


class LyapunovObserver(BaseObserver):
    """Relative Lyapunov value against the uniform state ``(r_inf, b_inf)``."""

    def __init__(self, r_inf: float, b_inf: float, grid: Grid, cfg: EntropyConfig) -> None:
        self.reference = to_xi_eta(DensityField1D.uniform(grid, r_inf, b_inf))
        self.cfg = cfg

    def observe(self, state: Any, t: float) -> Values:
        return {"lyapunov": lyapunov_relative(_as_xi_eta(state), self.reference, self.cfg)}


class PerturbationObserver(BaseObserver):
    """L2 distance of ``(r, b)`` from the uniform state ``(r_inf, b_inf)``."""

    def __init__(self, r_inf: float, b_inf: float) -> None:
        self.r_inf = r_inf
        self.b_inf = b_inf

    def observe(self, state: Any, t: float) -> Values:
        r, b, vol = _densities(state)
        sq = ((r - self.r_inf) ** 2 + (b - self.b_inf) ** 2).sum() * vol
        return {"pert_l2": float(np.sqrt(sq))}


class ModeAmplitudeObserver(BaseObserver):
    """Modulus of the ``exp(2 pi i m x)`` Fourier coefficient of ``r - mean(r)`` (1D)."""

    def __init__(self, m: int) -> None:
        self.m = m

    def observe(self, state: Any, t: float) -> Values:
        r = np.asarray(state.r)
        coeff = sp_fft.rfft(r - r.mean())[self.m] / r.size
        return {"mode_amp": float(np.abs(coeff))}


class ExitFluxObserver(BaseObserver):
    """Total outflow through the exits of a mixed-boundary square.

    Red leaves through ``x = 1`` and blue through ``y = 1``, each with normal
    flux ``outflux * density`` of the last cell.
    """

    def __init__(self, outflux: float) -> None:
        self.outflux = outflux

    def observe(self, state: Any, t: float) -> Values:
        h = state.grid.h
        red_exit = self.outflux * float(state.r[-1, :].sum()) * h
        blue_exit = self.outflux * float(state.b[:, -1].sum()) * h
        return {"exit_flux": red_exit + blue_exit}
