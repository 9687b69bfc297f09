from __future__ import annotations

import logging
import math
import numbers
from dataclasses import dataclass, fields, replace

from crossflow.core.exceptions import ParameterError

logger = logging.getLogger(__name__)

_CFL_SLACK = 1e-12
_GAMMA0_MIN = 1.0 / 8.0
_GAMMA0_MAX = 1.0
_REMARK_DIVISOR = 33.0


@dataclass(frozen=True)
class ModelParams:
    """Parameter tuple shared by every model.

    Attributes
    ----------
    alpha:
        Dimensionless transition-rate scale of the lattice and compartment models.
    gamma0:
        Base side-step rate.
    gamma1:
        Rate of side-steps against the crossing group's direction.
    gamma2:
        Rate of side-steps with the crossing group's direction.
    epsilon:
        Diffusion length scale of the parabolic systems.
    h:
        Mesh size. ``0`` when the model does not use it.
    dt:
        Time step. ``0`` when the solver picks its own.
    """

    alpha: float
    gamma0: float
    gamma1: float
    gamma2: float
    epsilon: float = 0.0
    h: float = 0.0
    dt: float = 0.0

    def __post_init__(self) -> None:
        for f in fields(self):
            value = getattr(self, f.name)
            if not isinstance(value, numbers.Real) or isinstance(value, bool):
                raise ParameterError(f"Parameter '{f.name}' must be a real number, got {value!r}.")
            if not math.isfinite(value):
                raise ParameterError(f"Parameter '{f.name}' must be finite, got {value!r}.")
            if value < 0:
                raise ParameterError(
                    f"Parameter '{f.name}' = {value} violates nonnegativity (must be >= 0)."
                )

    @property
    def side_step_total(self) -> float:
        """``2*gamma0 + gamma1 + gamma2``."""
        return 2.0 * self.gamma0 + self.gamma1 + self.gamma2

    @property
    def gamma_diff(self) -> float:
        """``gamma1 - gamma2``."""
        return self.gamma1 - self.gamma2

    def with_gammas_swapped(self) -> "ModelParams":
        return replace(self, gamma1=self.gamma2, gamma2=self.gamma1)

    def to_dict(self) -> dict[str, float]:
        return {f.name: float(getattr(self, f.name)) for f in fields(self)}


@dataclass(frozen=True)
class EntropyRegimeReport:
    """Outcome of the entropy-regime check.

    ``ok`` is False when any condition fails; ``warnings`` names each one.
    Simulations remain permitted either way.
    """

    ok: bool
    warnings: tuple[str, ...]
    gamma_bound: float


def validate_cfl(p: ModelParams) -> bool:
    """True iff ``alpha * max(1, 2*gamma0 + gamma1 + gamma2) <= 1``."""
    return p.alpha * max(1.0, p.side_step_total) <= 1.0 + _CFL_SLACK


def validate_entropy_regime(p: ModelParams) -> EntropyRegimeReport:
    """Check the side-step rates against the range where entropy growth is controlled.

    Two conditions are checked:

    * ``1/8 < gamma0 < 1``;
    * ``|gamma1 - gamma2| < min(2*gamma0 - 1/4, (1 - gamma0)/2) / 33``.

    Parameters
    ----------
    p:
        Model parameters.

    Returns
    -------
    EntropyRegimeReport
        ``ok`` plus one warning string per violated condition.
    """
    warnings: list[str] = []
    if not (_GAMMA0_MIN < p.gamma0 < _GAMMA0_MAX):
        warnings.append(
            f"gamma0 = {p.gamma0} is outside (1/8, 1): gamma0 <= 1/8 or gamma0 >= 1."
        )

    bound = min(2.0 * p.gamma0 - 0.25, (1.0 - p.gamma0) / 2.0) / _REMARK_DIVISOR
    diff = abs(p.gamma_diff)
    if not diff < bound:
        warnings.append(
            f"|gamma1 - gamma2| = {diff:.6g} >= side-step bound {bound:.6g}."
        )

    for msg in warnings:
        logger.warning("Entropy regime: %s", msg)
    return EntropyRegimeReport(ok=not warnings, warnings=tuple(warnings), gamma_bound=bound)


def alpha_matches_dt_over_h(p: ModelParams, rtol: float = 1e-12) -> bool:
    """True iff ``alpha == dt / h`` within ``rtol``; False when ``h`` is unset."""
    if p.h <= 0:
        return False
    return math.isclose(p.alpha, p.dt / p.h, rel_tol=rtol, abs_tol=0.0)
