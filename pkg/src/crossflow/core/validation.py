from __future__ import annotations

import logging

import numpy as np

from crossflow.config.schema import BOUNDS_TOL
from crossflow.core.exceptions import DensityBoundsError, NonFiniteStateError

logger = logging.getLogger(__name__)


def check_density_bounds(
    r: np.ndarray,
    b: np.ndarray,
    tol: float = BOUNDS_TOL,
    *,
    where: str = "",
) -> tuple[np.ndarray, np.ndarray, int]:
    """Validate a pair of density arrays and clamp floating-point undershoot.

    Values in ``[-tol, 0)`` are set to zero and counted. Anything below
    ``-tol``, above ``1 + tol``, or with ``r + b > 1 + tol`` aborts.

    Parameters
    ----------
    r, b:
        Density arrays of equal shape. Not modified.
    tol:
        Absolute tolerance (default ``1e-8``).
    where:
        Context appended to error messages (e.g. ``"t=0.35"``).

    Returns
    -------
    tuple
        ``(r, b, clamped)``: clamped copies and the number of clamped values.

    Raises
    ------
    NonFiniteStateError
        If any value is NaN or infinite.
    DensityBoundsError
        If a bound is violated beyond ``tol``.
    """
    suffix = f" ({where})" if where else ""
    if not (np.all(np.isfinite(r)) and np.all(np.isfinite(b))):
        raise NonFiniteStateError(f"Non-finite density encountered{suffix}.")

    for name, arr in (("r", r), ("b", b)):
        lo = float(arr.min())
        hi = float(arr.max())
        if lo < -tol:
            raise DensityBoundsError(f"Density {name} fell to {lo:.3e} < -{tol:g}{suffix}.")
        if hi > 1.0 + tol:
            raise DensityBoundsError(f"Density {name} rose to {hi:.17g} > 1 + {tol:g}{suffix}.")

    rho_max = float((r + b).max())
    if rho_max > 1.0 + tol:
        raise DensityBoundsError(f"Total density r + b reached {rho_max:.17g} > 1 + {tol:g}{suffix}.")

    neg_r = r < 0
    neg_b = b < 0
    clamped = int(neg_r.sum() + neg_b.sum())
    if clamped:
        r = np.where(neg_r, 0.0, r)
        b = np.where(neg_b, 0.0, b)
        logger.debug("Clamped %d slightly negative density values%s.", clamped, suffix)
    return r, b, clamped
