from __future__ import annotations

import logging
from dataclasses import dataclass
from typing import Iterable, Optional

import numpy as np

from crossflow.config.schema import COMPARTMENT_TOL
from crossflow.core.exceptions import BoxViolationError, ParameterError
from crossflow.core.grid import Grid
from crossflow.core.params import ModelParams, validate_cfl
from crossflow.diagnostics.observers import BaseObserver, ObserverSet
from crossflow.diagnostics.series import DiagnosticsSeries

logger = logging.getLogger(__name__)


@dataclass(frozen=True, eq=False)
class CompartmentState:
    """Occupied fractions ``r[i, j]``, ``b[i, j]`` of an ``N x N`` periodic compartment grid."""

    r: np.ndarray
    b: np.ndarray
    t: float = 0.0

    def __post_init__(self) -> None:
        for name in ("r", "b"):
            a = np.array(getattr(self, name), dtype=float, copy=True)
            if a.ndim != 2 or a.shape[0] != a.shape[1] or a.shape[0] < 2:
                raise ParameterError(f"Compartment field '{name}' must be square N x N with N >= 2.")
            a.setflags(write=False)
            object.__setattr__(self, name, a)
        if self.r.shape != self.b.shape:
            raise ParameterError("Compartment fields r and b must have the same shape.")

    @property
    def n(self) -> int:
        return int(self.r.shape[0])

    @property
    def grid(self) -> Grid:
        """Unit periodic square with one compartment per cell."""
        return Grid(dims=2, n=self.n)

    def transposed_swapped(self) -> "CompartmentState":
        return CompartmentState(self.b.T, self.r.T, self.t)


def _species_update(u: np.ndarray, w: np.ndarray, p: ModelParams) -> np.ndarray:
    """One explicit update of species ``u`` walking along +axis 0 among ``w``.

    Side-steps go along axis 1: towards ``j - 1`` with rate ``gamma1`` and
    ``j + 1`` with ``gamma2`` when ``w`` blocks the cell ahead.
    """
    vac = 1.0 - (u + w)
    other_ahead = np.roll(w, -1, axis=0)

    out_main = p.alpha * np.roll(vac, -1, axis=0) * u
    out_minus = p.alpha * np.roll(vac, 1, axis=1) * (p.gamma0 + p.gamma1 * other_ahead) * u
    out_plus = p.alpha * np.roll(vac, -1, axis=1) * (p.gamma0 + p.gamma2 * other_ahead) * u

    in_main = np.roll(out_main, 1, axis=0)
    in_minus = np.roll(out_minus, -1, axis=1)
    in_plus = np.roll(out_plus, 1, axis=1)
    # grouped per move type so that uniform states are reproduced exactly
    return u + ((in_main - out_main) + (in_minus - out_minus) + (in_plus - out_plus))


def _check_box(r: np.ndarray, b: np.ndarray, t: float, tol: float) -> None:
    lo = min(float(r.min()), float(b.min()))
    hi = max(float(r.max()), float(b.max()))
    rho_max = float((r + b).max())
    if lo < -tol or hi > 1.0 + tol or rho_max > 1.0 + tol:
        msg = (
            f"Compartment update left the admissible box at t={t:g}: "
            f"min={lo:.3e}, max={hi:.17g}, max(r+b)={rho_max:.17g}."
        )
        logger.error(msg)
        raise BoxViolationError(msg)


def compartment_step(
    s: CompartmentState,
    p: ModelParams,
    *,
    tol: float = COMPARTMENT_TOL,
) -> CompartmentState:
    """Apply the master equations once, with every rate taken at the old state.

    Time advances by ``p.dt`` (or by one when ``dt`` is unset).

    Raises
    ------
    ParameterError
        If ``p`` violates the CFL condition.
    BoxViolationError
        If a fraction leaves ``[0, 1]`` or ``r + b`` exceeds one beyond ``tol``.
    """
    if not validate_cfl(p):
        raise ParameterError("Compartment dynamics require the CFL condition alpha * max(1, 2*gamma0 + gamma1 + gamma2) <= 1.")
    r_new = _species_update(s.r, s.b, p)
    b_new = _species_update(s.b.T, s.r.T, p).T
    t_new = s.t + (p.dt if p.dt > 0 else 1.0)
    _check_box(r_new, b_new, t_new, tol)
    return CompartmentState(r_new, b_new, t_new)


@dataclass(frozen=True)
class CompartmentRun:
    final: CompartmentState
    series: DiagnosticsSeries


def run_compartment(
    initial: CompartmentState,
    p: ModelParams,
    steps: int,
    observers: Optional[Iterable[BaseObserver]] = None,
    *,
    every: int = 1,
) -> CompartmentRun:
    if steps < 0:
        raise ParameterError(f"steps must be >= 0, got {steps}.")
    if every < 1:
        raise ParameterError(f"every must be >= 1, got {every}.")
    observer_set = ObserverSet(observers or [])
    series = DiagnosticsSeries()
    state = initial
    series.append(state.t, observer_set.collect(state, state.t))
    for k in range(1, steps + 1):
        state = compartment_step(state, p)
        if k % every == 0 or k == steps:
            series.append(state.t, observer_set.collect(state, state.t))
    return CompartmentRun(final=state, series=series)


@dataclass(frozen=True)
class BoxCounterexample:
    """A random admissible state whose update left the box."""

    trial: int
    message: str
    r: np.ndarray
    b: np.ndarray


def scan_box_violations(
    p: ModelParams,
    trials: int = 100,
    n: int = 8,
    seed: int = 0,
) -> list[BoxCounterexample]:
    """Try ``trials`` random admissible states and collect those that leave the box.

    States are drawn with ``(r, b, 1 - r - b)`` uniform on the simplex per cell.
    """
    rng = np.random.default_rng(seed)
    found: list[BoxCounterexample] = []
    for trial in range(trials):
        parts = rng.dirichlet(np.ones(3), size=(n, n))
        state = CompartmentState(parts[..., 0], parts[..., 1])
        try:
            compartment_step(state, p)
        except BoxViolationError as exc:
            found.append(BoxCounterexample(trial, str(exc), state.r, state.b))
    if found:
        logger.warning("Found %d box violations in %d random trials.", len(found), trials)
    return found
