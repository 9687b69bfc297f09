from __future__ import annotations

import logging
import math
from dataclasses import dataclass
from typing import Callable, Iterable, Optional

import numpy as np

from crossflow.config.schema import BOUNDS_TOL, C_SAFE
from crossflow.core.exceptions import ParameterError
from crossflow.core.grid import Grid
from crossflow.core.params import ModelParams
from crossflow.core.validation import check_density_bounds
from crossflow.diagnostics.observers import BaseObserver, ObserverSet
from crossflow.diagnostics.series import DiagnosticsSeries
from crossflow.pde.boundary import Mode
from crossflow.pde.fields import DensityField2D
from crossflow.pde.fluxes import eval_fluxes, flux_divergence
from crossflow.stability.linear import hyperbolic_2d, matrices_2d, spectral_radius_2x2

logger = logging.getLogger(__name__)

_TIME_EPS = 1e-12


def dt_stable(s: DensityField2D, p: ModelParams, mode: Mode, c_safe: float = C_SAFE) -> float:
    """Explicit step bound ``c_safe * min(h / S_max, h^2 / (4 eps D_max))``.

    ``S_max`` is at least one and bounds the spectral radii of ``A`` and ``B``
    over the current state; ``D_max = max(1, 2 gamma0 + gamma1 + gamma2)``.
    """
    h = s.grid.h
    A, B = matrices_2d(s.r, s.b, p)
    s_max = max(1.0, float(spectral_radius_2x2(A).max()), float(spectral_radius_2x2(B).max()))
    limit = h / s_max
    if Mode(mode) is Mode.PARABOLIC and p.epsilon > 0:
        d_max = max(1.0, p.side_step_total)
        limit = min(limit, h * h / (4.0 * p.epsilon * d_max))
    return c_safe * limit


def _rhs(r: np.ndarray, b: np.ndarray, s: DensityField2D, p: ModelParams, mode: Mode) -> tuple[np.ndarray, np.ndarray]:
    field = DensityField2D(r, b, s.grid, s.t)
    return flux_divergence(eval_fluxes(field, p, mode), s.grid.h)


def step_2d(s: DensityField2D, p: ModelParams, mode: Mode, dt: float) -> DensityField2D:
    """One explicit midpoint step of the finite-volume scheme.

    Raises
    ------
    DensityBoundsError
        If a density leaves ``[-1e-8, 1 + 1e-8]`` or ``r + b > 1 + 1e-8``.
    NonFiniteStateError
        If the new state is not finite.
    """
    if not dt > 0:
        raise ParameterError(f"Time step must be > 0, got {dt}.")
    mode = Mode(mode)
    dr, db = _rhs(s.r, s.b, s, p, mode)
    r_half = s.r + 0.5 * dt * dr
    b_half = s.b + 0.5 * dt * db
    dr, db = _rhs(r_half, b_half, s, p, mode)
    r_new = s.r + dt * dr
    b_new = s.b + dt * db
    t_new = s.t + dt
    r_new, b_new, clamped = check_density_bounds(r_new, b_new, BOUNDS_TOL, where=f"t={t_new:.6g}")
    return DensityField2D(r_new, b_new, s.grid, t_new, s.clamp_count + clamped)


@dataclass(frozen=True)
class PDERun:
    final: object
    series: DiagnosticsSeries
    steps: int
    exploratory: bool = False
    max_mass_drift: float = 0.0


def _relative_drift(m0: float, m: float) -> float:
    return abs(m - m0) / m0 if m0 > 0 else abs(m - m0)


def integrate(
    initial,
    p: ModelParams,
    mode: Mode,
    t_end: float,
    stepper: Callable,
    stable_dt: Callable,
    observers: Optional[Iterable[BaseObserver]] = None,
    *,
    sample_every: Optional[float] = None,
    snapshot_stride: int = 0,
    on_snapshot: Optional[Callable[[object], None]] = None,
    on_sample: Optional[Callable[[object], None]] = None,
) -> tuple[object, DiagnosticsSeries, int, float]:
    """Shared time loop: adaptive stable steps cut to hit every sample time.

    Observers run at ``t0``, at every multiple of ``sample_every`` and at
    ``t_end``; every ``snapshot_stride``-th sample is passed to
    ``on_snapshot``.
    """
    if t_end < initial.t:
        raise ParameterError(f"t_end={t_end} lies before the initial time {initial.t}.")
    observer_set = ObserverSet(observers or [])
    series = DiagnosticsSeries()
    interval = sample_every if sample_every and sample_every > 0 else max(t_end - initial.t, 1.0)
    tol = _TIME_EPS * max(1.0, abs(t_end))

    state = initial
    m_r0, m_b0 = state.mass_r, state.mass_b
    drift = 0.0
    samples = 0

    def _sample(s) -> None:
        nonlocal samples, drift
        series.append(s.t, observer_set.collect(s, s.t))
        drift = max(drift, _relative_drift(m_r0, s.mass_r), _relative_drift(m_b0, s.mass_b))
        if on_sample is not None:
            on_sample(s)
        if on_snapshot is not None and snapshot_stride > 0 and samples % snapshot_stride == 0:
            on_snapshot(s)
        samples += 1

    _sample(state)
    next_sample = initial.t + interval
    steps = 0
    while state.t < t_end - tol:
        dt = stable_dt(state)
        if p.dt > 0:
            dt = min(dt, p.dt)
        target = min(next_sample, t_end)
        dt = min(dt, target - state.t)
        state = stepper(state, dt)
        steps += 1
        if state.t >= target - tol:
            _sample(state)
            while next_sample <= state.t + tol:
                next_sample += interval
    if series.times[-1] < state.t:
        _sample(state)
    return state, series, steps, drift


def run_2d(
    initial: DensityField2D,
    p: ModelParams,
    mode: Mode,
    t_end: float,
    observers: Optional[Iterable[BaseObserver]] = None,
    *,
    sample_every: Optional[float] = None,
    snapshot_stride: int = 0,
    on_snapshot: Optional[Callable[[DensityField2D], None]] = None,
) -> PDERun:
    """Integrate the 2D system from ``initial`` to ``t_end``.

    Hyperbolic runs whose state leaves the 2D hyperbolic set are flagged
    ``exploratory``.
    """
    mode = Mode(mode)
    exploratory = False

    def _check_hyperbolic(s: DensityField2D) -> None:
        nonlocal exploratory
        if mode is Mode.HYPERBOLIC and not exploratory and not bool(np.all(hyperbolic_2d(s.r, s.b, p))):
            exploratory = True
            logger.warning("Hyperbolic run left the hyperbolic region at t=%.6g; results are exploratory.", s.t)

    final, series, steps, drift = integrate(
        initial,
        p,
        mode,
        t_end,
        stepper=lambda s, dt: step_2d(s, p, mode, dt),
        stable_dt=lambda s: dt_stable(s, p, mode),
        observers=observers,
        sample_every=sample_every,
        snapshot_stride=snapshot_stride,
        on_snapshot=on_snapshot,
        on_sample=_check_hyperbolic,
    )
    if final.clamp_count:
        logger.info("Clamped %d slightly negative densities during the run.", final.clamp_count)
    logger.info("2D %s run reached t=%.6g in %d steps.", mode.value, final.t, steps)
    return PDERun(final=final, series=series, steps=steps, exploratory=exploratory, max_mass_drift=drift)


def perturbed_state_2d(
    grid: Grid,
    r_inf: float,
    b_inf: float,
    amplitude: float,
    k: int = 1,
) -> DensityField2D:
    """``r = r_inf + a cos(k pi x) sin(k pi y)``, ``b = b_inf + a sin(k pi x) cos(k pi y)``."""
    x, y = grid.mesh()
    kx = k * math.pi * x
    ky = k * math.pi * y
    r = r_inf + amplitude * np.cos(kx) * np.sin(ky)
    b = b_inf + amplitude * np.sin(kx) * np.cos(ky)
    return DensityField2D(r, b, grid)
