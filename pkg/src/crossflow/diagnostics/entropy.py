from __future__ import annotations

import logging
from dataclasses import dataclass
from typing import Optional, Protocol

import numpy as np

from crossflow.config.schema import LOG_FLOOR
from crossflow.core.exceptions import ParameterError
from crossflow.core.grid import Grid
from crossflow.diagnostics.fits import fit_line
from crossflow.diagnostics.series import DiagnosticsSeries
from crossflow.pde.fields import XiEtaField

logger = logging.getLogger(__name__)

_MIN_GROWTH_SAMPLES = 10


class _Densities2D(Protocol):
    r: np.ndarray
    b: np.ndarray
    grid: Grid


@dataclass(frozen=True)
class EntropyConfig:
    """Settings shared by the entropy and Lyapunov functionals.

    Attributes
    ----------
    epsilon:
        Diffusion scale weighting the logarithmic terms.
    log_floor:
        Arguments of logarithms are floored at this value; states are never
        modified by it.
    delta:
        Young-inequality parameter in ``(0, 2]``; the relative functional is
        coercive when ``xi_inf >= 1/2 + 1/(4 delta)``.
    alpha_lyap:
        Weight of the gradient term of the Lyapunov functional.
    """

    epsilon: float
    log_floor: float = LOG_FLOOR
    delta: float = 2.0
    alpha_lyap: float = 1.0

    def __post_init__(self) -> None:
        if self.epsilon < 0:
            raise ParameterError(f"epsilon must be >= 0, got {self.epsilon}.")
        if not self.log_floor > 0:
            raise ParameterError(f"log_floor must be > 0, got {self.log_floor}.")
        if not 0 < self.delta <= 2:
            raise ParameterError(f"delta must lie in (0, 2], got {self.delta}.")
        if self.alpha_lyap < 0:
            raise ParameterError(f"alpha_lyap must be >= 0, got {self.alpha_lyap}.")

    @property
    def xi_threshold(self) -> float:
        return 0.5 + 1.0 / (4.0 * self.delta)


def _flog(a: np.ndarray, floor: float) -> np.ndarray:
    return np.log(np.maximum(a, floor))


def _potentials(grid: Grid) -> tuple[np.ndarray, np.ndarray]:
    x, y = grid.mesh()
    return -x, -y


def entropy_2d(s: _Densities2D, cfg: EntropyConfig) -> float:
    """Midpoint-rule value of the 2D entropy with walking potentials ``-x`` and ``-y``.

    ``eps * [r(log r - 1) + b(log b - 1) + (1 - rho)(log(1 - rho) - 1) / 2] + r V_r + b V_b``
    integrated over the domain.
    """
    r, b = s.r, s.b
    vac = 1.0 - r - b
    eps = cfg.epsilon
    fl = cfg.log_floor
    v_r, v_b = _potentials(s.grid)
    density = eps * (
        r * (_flog(r, fl) - 1.0)
        + b * (_flog(b, fl) - 1.0)
        + 0.5 * vac * (_flog(vac, fl) - 1.0)
    ) + r * v_r + b * v_b
    return float(density.sum() * s.grid.cell_volume)


@dataclass(frozen=True)
class EntropyVariables:
    u: np.ndarray
    v: np.ndarray
    below_floor: np.ndarray

    @property
    def any_below_floor(self) -> bool:
        return bool(self.below_floor.any())


def entropy_variables_at(
    r: np.ndarray | float,
    b: np.ndarray | float,
    x: np.ndarray | float,
    y: np.ndarray | float,
    cfg: EntropyConfig,
) -> tuple[np.ndarray, np.ndarray]:
    """Pointwise ``u = eps log r - (eps/2) log(1 - rho) - x`` and its blue twin."""
    ra = np.asarray(r, dtype=float)
    ba = np.asarray(b, dtype=float)
    vac_log = _flog(1.0 - ra - ba, cfg.log_floor)
    u = cfg.epsilon * _flog(ra, cfg.log_floor) - 0.5 * cfg.epsilon * vac_log - np.asarray(x)
    v = cfg.epsilon * _flog(ba, cfg.log_floor) - 0.5 * cfg.epsilon * vac_log - np.asarray(y)
    return u, v


def entropy_variables(s: _Densities2D, cfg: EntropyConfig) -> EntropyVariables:
    """Entropy variables on cell centers, flagging cells where ``r``, ``b`` or ``1 - rho`` is below the floor."""
    x, y = s.grid.mesh()
    u, v = entropy_variables_at(s.r, s.b, x, y, cfg)
    fl = cfg.log_floor
    below = (s.r < fl) | (s.b < fl) | (1.0 - s.r - s.b < fl)
    if below.any():
        logger.debug("Entropy variables: %d cells below the log floor.", int(below.sum()))
    return EntropyVariables(u=u, v=v, below_floor=below)


@dataclass(frozen=True)
class EntropyGrowthReport:
    """Least-squares slope of ``E(t)`` and the largest single-step increase."""

    slope: float
    intercept: float
    max_step_increase: float
    n_samples: int
    times: tuple[float, ...]
    values: tuple[float, ...]

    def is_at_most_linear(self, factor: float = 5.0, transient: float = 0.1, atol: float = 1e-10) -> bool:
        """No step increase after the transient exceeds ``factor * slope * dt``."""
        t = np.asarray(self.times)
        e = np.asarray(self.values)
        start = int(np.ceil(transient * (t.size - 1)))
        dt = np.diff(t[start:])
        de = np.diff(e[start:])
        allowed = factor * max(self.slope, 0.0) * dt + atol
        return bool(np.all(de <= allowed))


def monitor_entropy_growth(series: DiagnosticsSeries, column: str = "entropy") -> EntropyGrowthReport:
    """Fit the entropy series of a run.

    Raises
    ------
    ValueError
        If fewer than 10 finite samples are available.
    """
    t = series.column("t")
    e = series.column(column)
    keep = np.isfinite(e)
    t, e = t[keep], e[keep]
    if t.size < _MIN_GROWTH_SAMPLES:
        raise ValueError(
            f"Entropy monitoring needs at least {_MIN_GROWTH_SAMPLES} samples, got {t.size}."
        )
    fit = fit_line(t, e)
    increase = float(np.max(np.diff(e), initial=0.0))
    return EntropyGrowthReport(
        slope=fit.slope,
        intercept=fit.intercept,
        max_step_increase=increase,
        n_samples=int(t.size),
        times=tuple(float(v) for v in t),
        values=tuple(float(v) for v in e),
    )


def entropy_1d(x: XiEtaField, cfg: Optional[EntropyConfig] = None) -> float:
    """``sum 1/2 [eta^2 - 2(xi(log xi - 1) + 1) + 2(1 - xi)^2] h``; nonnegative on the admissible box."""
    floor = cfg.log_floor if cfg is not None else LOG_FLOOR
    xi, eta = x.xi, x.eta
    density = 0.5 * (
        eta**2 - 2.0 * (xi * (_flog(xi, floor) - 1.0) + 1.0) + 2.0 * (1.0 - xi) ** 2
    )
    return float(density.sum() * x.grid.h)


def _relative_density(x: XiEtaField, x_inf: XiEtaField, floor: float) -> np.ndarray:
    xi_inf = x_inf.xi
    if np.ptp(xi_inf) > 0 or np.ptp(x_inf.eta) > 0:
        raise ParameterError("The reference state of a relative entropy must be spatially uniform.")
    if not np.all(xi_inf > 0):
        raise ParameterError(f"The reference state needs vacancy xi > 0, got {float(xi_inf.flat[0])!r}.")
    q = np.maximum(x.xi, floor) / xi_inf
    return 0.5 * (
        (x.eta - x_inf.eta) ** 2
        - 2.0 * xi_inf * (q * (np.log(q) - 1.0) + 1.0)
        + 2.0 * (x.xi - xi_inf) ** 2
    )


def relative_entropy_1d(x: XiEtaField, x_inf: XiEtaField, cfg: EntropyConfig) -> float:
    """Relative entropy with respect to a uniform state, without the gradient term."""
    return float(_relative_density(x, x_inf, cfg.log_floor).sum() * x.grid.h)


def lyapunov_relative(x: XiEtaField, x_inf: XiEtaField, cfg: EntropyConfig) -> float:
    """Relative entropy plus ``alpha_lyap * eps^2 / 2 * (d/dx (xi - xi_inf))^2``.

    Nonnegative near equilibria with ``xi_inf > 1/2``; zero at the equilibrium.
    The gradient uses periodic forward differences.

    Raises
    ------
    ParameterError
        If ``x_inf`` is not uniform or has no vacancy.
    """
    h = x.grid.h
    dxi = (np.roll(x.xi, -1) - x.xi) / h
    grad = 0.5 * cfg.alpha_lyap * cfg.epsilon**2 * dxi**2
    return float((_relative_density(x, x_inf, cfg.log_floor) + grad).sum() * h)
