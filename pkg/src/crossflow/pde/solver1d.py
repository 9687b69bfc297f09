from __future__ import annotations

import logging
import math
from typing import Callable, Iterable, Optional

import numpy as np

from crossflow.config.schema import BOUNDS_TOL, C_SAFE
from crossflow.core.exceptions import NonFiniteStateError, ParameterError
from crossflow.core.grid import Grid
from crossflow.core.params import ModelParams
from crossflow.core.validation import check_density_bounds
from crossflow.diagnostics.observers import BaseObserver
from crossflow.pde.boundary import Mode
from crossflow.pde.fields import DensityField1D, XiEtaField
from crossflow.pde.solver2d import PDERun, integrate
from crossflow.stability.linear import classify_hyperbolic_1d, matrix_c_1d, spectral_radius_2x2

logger = logging.getLogger(__name__)


def _rightward_rate(u: np.ndarray, w: np.ndarray, eps: float, h: float) -> np.ndarray:
    """``du/dt`` for a species walking right among ``w`` on a periodic line."""
    uR = np.roll(u, -1)
    wR = np.roll(w, -1)
    flux = u * (1.0 - (uR + wR))
    if eps > 0:
        w_f = 0.5 * (w + wR)
        u_f = 0.5 * (u + uR)
        flux = flux - eps * ((1.0 - w_f) * (uR - u) / h + u_f * (wR - w) / h)
    return -(flux - np.roll(flux, 1)) / h


def rhs_1d(r: np.ndarray, b: np.ndarray, p: ModelParams, mode: Mode, h: float) -> tuple[np.ndarray, np.ndarray]:
    """Semi-discrete right-hand side; blue is the reflected red operator."""
    eps = p.epsilon if Mode(mode) is Mode.PARABOLIC else 0.0
    dr = _rightward_rate(r, b, eps, h)
    db = _rightward_rate(b[::-1], r[::-1], eps, h)[::-1]
    return dr, db


def dt_stable_1d(s: DensityField1D, p: ModelParams, mode: Mode, c_safe: float = C_SAFE) -> float:
    """``c_safe * min(h / S_max, h^2 / (4 eps))`` with ``S_max >= 1`` bounding the spectrum of ``C``."""
    h = s.grid.h
    s_max = max(1.0, float(spectral_radius_2x2(matrix_c_1d(s.r, s.b)).max()))
    limit = h / s_max
    if Mode(mode) is Mode.PARABOLIC and p.epsilon > 0:
        limit = min(limit, h * h / (4.0 * p.epsilon))
    return c_safe * limit


def step_1d(s: DensityField1D, p: ModelParams, mode: Mode, dt: float) -> DensityField1D:
    """One explicit midpoint step of the 1D counterflow system."""
    if not dt > 0:
        raise ParameterError(f"Time step must be > 0, got {dt}.")
    h = s.grid.h
    dr, db = rhs_1d(s.r, s.b, p, mode, h)
    dr, db = rhs_1d(s.r + 0.5 * dt * dr, s.b + 0.5 * dt * db, p, mode, h)
    r_new = s.r + dt * dr
    b_new = s.b + dt * db
    t_new = s.t + dt
    r_new, b_new, clamped = check_density_bounds(r_new, b_new, BOUNDS_TOL, where=f"t={t_new:.6g}")
    return DensityField1D(r_new, b_new, s.grid, t_new, s.clamp_count + clamped)


def run_1d(
    initial: DensityField1D,
    p: ModelParams,
    mode: Mode,
    t_end: float,
    observers: Optional[Iterable[BaseObserver]] = None,
    *,
    sample_every: Optional[float] = None,
    snapshot_stride: int = 0,
    on_snapshot: Optional[Callable[[DensityField1D], None]] = None,
) -> PDERun:
    """Integrate the 1D system; hyperbolic runs in the elliptic region are flagged ``exploratory``."""
    mode = Mode(mode)
    exploratory = False

    def _check_hyperbolic(s: DensityField1D) -> None:
        nonlocal exploratory
        if mode is Mode.HYPERBOLIC and not exploratory and not bool(np.all(classify_hyperbolic_1d(s.r, s.b))):
            exploratory = True
            logger.warning("Hyperbolic 1D run entered the elliptic region at t=%.6g; results are exploratory.", s.t)

    final, series, steps, drift = integrate(
        initial,
        p,
        mode,
        t_end,
        stepper=lambda s, dt: step_1d(s, p, mode, dt),
        stable_dt=lambda s: dt_stable_1d(s, p, mode),
        observers=observers,
        sample_every=sample_every,
        snapshot_stride=snapshot_stride,
        on_snapshot=on_snapshot,
        on_sample=_check_hyperbolic,
    )
    logger.info("1D %s run reached t=%.6g in %d steps.", mode.value, final.t, steps)
    return PDERun(final=final, series=series, steps=steps, exploratory=exploratory, max_mass_drift=drift)


def perturbed_state_1d(
    grid: Grid,
    r_inf: float,
    b_inf: float,
    amplitude: float,
    profile: str = "sin",
    k: int = 2,
) -> DensityField1D:
    """``r = r_inf + a f(k pi x)``, ``b = b_inf - a f(k pi x)`` with ``f`` sine or cosine."""
    funcs = {"sin": np.sin, "cos": np.cos}
    if profile not in funcs:
        raise ParameterError(f"Unknown perturbation profile {profile!r}; expected 'sin' or 'cos'.")
    wave = funcs[profile](k * math.pi * grid.cell_centers())
    return DensityField1D(r_inf + amplitude * wave, b_inf - amplitude * wave, grid)


def stationary_residual(s: DensityField1D, p: ModelParams) -> tuple[np.ndarray, np.ndarray]:
    """Pointwise residuals of the zero-flux stationary equations (centred differences).

    ``res_r = -(1 - rho) r + eps((1 - b) r' + r b')`` and
    ``res_b = (1 - rho) b + eps((1 - r) b' + b r')``.
    """
    h = s.grid.h
    r, b = s.r, s.b
    dr = (np.roll(r, -1) - np.roll(r, 1)) / (2.0 * h)
    db = (np.roll(b, -1) - np.roll(b, 1)) / (2.0 * h)
    vac = 1.0 - r - b
    eps = p.epsilon
    res_r = -vac * r + eps * ((1.0 - b) * dr + r * db)
    res_b = vac * b + eps * ((1.0 - r) * db + b * dr)
    return res_r, res_b


def _xi_eta_speed(xi: np.ndarray, eta: np.ndarray) -> np.ndarray:
    """Spectral radius of the Jacobian of (-eta xi, xi (1 - xi))."""
    jac = np.empty(np.shape(xi) + (2, 2))
    jac[..., 0, 0] = -eta
    jac[..., 0, 1] = -xi
    jac[..., 1, 0] = 1.0 - 2.0 * xi
    jac[..., 1, 1] = 0.0
    return spectral_radius_2x2(jac)


def _xi_eta_rate(xi: np.ndarray, eta: np.ndarray, eps: float, h: float) -> tuple[np.ndarray, np.ndarray]:
    xiR = np.roll(xi, -1)
    etaR = np.roll(eta, -1)
    a = np.maximum(_xi_eta_speed(xi, eta), _xi_eta_speed(xiR, etaR))
    # local Lax-Friedrichs flux for (-eta xi, xi (1 - xi))
    f_xi = 0.5 * (-(eta * xi) - (etaR * xiR)) - 0.5 * a * (xiR - xi)
    f_eta = 0.5 * (xi * (1.0 - xi) + xiR * (1.0 - xiR)) - 0.5 * a * (etaR - eta)
    if eps > 0:
        xi_f = 0.5 * (xi + xiR)
        eta_f = 0.5 * (eta + etaR)
        f_xi = f_xi - eps * (xiR - xi) / h
        f_eta = f_eta - eps * (xi_f * (etaR - eta) / h - eta_f * (xiR - xi) / h)
    return -(f_xi - np.roll(f_xi, 1)) / h, -(f_eta - np.roll(f_eta, 1)) / h


def dt_stable_xi_eta(x: XiEtaField, p: ModelParams, mode: Mode, c_safe: float = C_SAFE) -> float:
    h = x.grid.h
    limit = h / max(1.0, float(_xi_eta_speed(x.xi, x.eta).max()))
    if Mode(mode) is Mode.PARABOLIC and p.epsilon > 0:
        limit = min(limit, h * h / (4.0 * p.epsilon))
    return c_safe * limit


def step_xi_eta(x: XiEtaField, p: ModelParams, mode: Mode, dt: float) -> XiEtaField:
    """Midpoint step of the transformed system for ``xi = 1 - rho`` and ``eta = r - b``."""
    if not dt > 0:
        raise ParameterError(f"Time step must be > 0, got {dt}.")
    eps = p.epsilon if Mode(mode) is Mode.PARABOLIC else 0.0
    h = x.grid.h
    dxi, deta = _xi_eta_rate(x.xi, x.eta, eps, h)
    dxi, deta = _xi_eta_rate(x.xi + 0.5 * dt * dxi, x.eta + 0.5 * dt * deta, eps, h)
    xi = x.xi + dt * dxi
    eta = x.eta + dt * deta
    if not (np.all(np.isfinite(xi)) and np.all(np.isfinite(eta))):
        raise NonFiniteStateError(f"Non-finite (xi, eta) state at t={x.t + dt:.6g}.")
    return XiEtaField(xi, eta, x.grid, x.t + dt)


def run_xi_eta(x: XiEtaField, p: ModelParams, mode: Mode, t_end: float) -> XiEtaField:
    """Integrate the transformed system to ``t_end`` with stable explicit steps."""
    state = x
    tol = 1e-12 * max(1.0, abs(t_end))
    while state.t < t_end - tol:
        dt = min(dt_stable_xi_eta(state, p, mode), t_end - state.t)
        if p.dt > 0:
            dt = min(dt, p.dt)
        state = step_xi_eta(state, p, mode, dt)
    return state
