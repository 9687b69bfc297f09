from __future__ import annotations

import logging
import math
from dataclasses import dataclass
from enum import Enum
from typing import Optional, Union

import numpy as np
import pandas as pd
from scipy import ndimage

from crossflow.config.schema import RASTER_COLUMNS
from crossflow.core.exceptions import ParameterError
from crossflow.stability.linear import classify_hyperbolic_1d, eig_C_1d, max_growth_parabolic

logger = logging.getLogger(__name__)

_MIN_K_MAX = 16
_GROWTH_TOL = 1e-12
_SIMPLEX_TOL = 1e-12
_MIN_RESOLUTION = 32


class RegionMethod(str, Enum):
    CURVE = "curve"
    SCAN = "scan"


@dataclass(frozen=True)
class StabilityReport:
    """Linear-stability classification of a uniform state ``(r_inf, b_inf)``.

    Attributes
    ----------
    eig_C:
        Eigenvalues of the 1D first-order matrix.
    hyperbolic_1d:
        Both eigenvalues real.
    in_region_D:
        Some Fourier mode of the regularized system grows.
    method:
        Method deciding ``in_region_D``.
    max_growth, argmax_k:
        Largest real part over the scanned integer wavenumbers and where it
        occurs (``None`` without ``epsilon``).
    k_crit:
        Wavenumber bound evaluated from the closed-form expression, ``None``
        when its radicand is negative.
    k_crit_scan:
        Largest scanned wavenumber with positive growth, ``None`` if none.
    discrepancy:
        The closed-form bound and the scan disagree by more than one mode.
    bracketed:
        The growth maximum lies strictly inside the scanned range.
    """

    r_inf: float
    b_inf: float
    eig_C: tuple[complex, complex]
    hyperbolic_1d: bool
    in_region_D: bool
    method: RegionMethod
    max_growth: Optional[float] = None
    argmax_k: Optional[int] = None
    k_crit: Optional[float] = None
    k_crit_scan: Optional[int] = None
    discrepancy: bool = False
    bracketed: bool = True


def _check_simplex(r: float, b: float) -> None:
    if r < -_SIMPLEX_TOL or b < -_SIMPLEX_TOL or r + b > 1.0 + _SIMPLEX_TOL:
        raise ParameterError(f"({r}, {b}) lies outside the density simplex.")


def region_D_curves(r: Union[float, np.ndarray]) -> tuple[np.ndarray, np.ndarray]:
    """Lower and upper boundary of region D at ``r``, both clamped to ``1 - r``."""
    r = np.asarray(r, dtype=float)
    denom = 8.0 * r - 9.0
    if np.any(denom == 0):
        raise ParameterError("Region D curves are singular at r = 9/8.")
    centre = (-6.0 + 9.0 * r - 4.0 * r**2) / denom
    radicand = (2.0 * r - 3.0 * r**2 + r**4) / denom**2
    spread = 4.0 * np.sqrt(np.maximum(radicand, 0.0))
    cap = 1.0 - r
    return np.minimum(centre - spread, cap), np.minimum(centre + spread, cap)


def in_region_D_curve(r: Union[float, np.ndarray], b: Union[float, np.ndarray]) -> Union[bool, np.ndarray]:
    lo, hi = region_D_curves(r)
    out = (lo < b) & (b < hi)
    return bool(out) if np.ndim(out) == 0 else out


def k_crit_formula(r: Union[float, np.ndarray], b: Union[float, np.ndarray], epsilon: float) -> np.ndarray:
    """Closed-form wavenumber bound below which modes are unstable; NaN where undefined."""
    r = np.asarray(r, dtype=float)
    rho = r + np.asarray(b, dtype=float)
    radicand = (-4.0 + rho * (12.0 - 8.0 * r**2 + rho * (-9.0 + 8.0 * r))) / (rho - 2.0) ** 2
    with np.errstate(invalid="ignore"):
        return np.where(radicand >= 0, np.sqrt(np.maximum(radicand, 0.0)) / (epsilon * np.pi), np.nan)


def scan_k_max(epsilon: float, k_crit: Optional[float] = None) -> int:
    """Upper end of the integer wavenumber scan: at least twice the larger of ``k_crit`` and ``1/(eps pi)``."""
    ref = 1.0 / (epsilon * np.pi)
    if k_crit is not None and math.isfinite(k_crit):
        ref = max(ref, k_crit)
    return max(_MIN_K_MAX, int(math.ceil(2.0 * ref)))


def _scan(r: np.ndarray, b: np.ndarray, epsilon: float, k_max: int) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
    """Growth over ``k = 1..k_max`` per point: (max growth, argmax k, largest unstable k or 0)."""
    k = np.arange(1, k_max + 1, dtype=float)
    growth = max_growth_parabolic(r[:, None], b[:, None], k[None, :], epsilon)
    best = np.argmax(growth, axis=1)
    max_growth = growth[np.arange(r.size), best]
    unstable = growth > _GROWTH_TOL
    last_unstable = np.where(unstable.any(axis=1), k_max - np.argmax(unstable[:, ::-1], axis=1), 0)
    return max_growth, best + 1, last_unstable


def region_D_membership(
    r_inf: float,
    b_inf: float,
    method: Union[RegionMethod, str] = RegionMethod.SCAN,
    epsilon: Optional[float] = None,
    k_max: Optional[int] = None,
) -> StabilityReport:
    """Classify ``(r_inf, b_inf)`` with respect to region D.

    ``SCAN`` marks the point unstable when some integer wavenumber
    ``1 <= k <= k_max`` has positive growth and is the reference method.
    ``CURVE`` tests ``lo(r) < b < hi(r)`` against the closed-form boundary
    curves. With ``epsilon`` given, growth information is filled in for both.

    Raises
    ------
    ParameterError
        If the point is outside the simplex, or ``SCAN`` is requested without
        a positive ``epsilon``.
    """
    method = RegionMethod(method)
    _check_simplex(r_inf, b_inf)
    if method is RegionMethod.SCAN and not (epsilon is not None and epsilon > 0):
        raise ParameterError("Scan membership needs epsilon > 0.")

    lam1, lam2 = eig_C_1d(r_inf, b_inf)
    hyperbolic = classify_hyperbolic_1d(r_inf, b_inf)
    curve_member = in_region_D_curve(r_inf, b_inf)

    if epsilon is None or epsilon <= 0:
        return StabilityReport(
            r_inf=r_inf,
            b_inf=b_inf,
            eig_C=(lam1, lam2),
            hyperbolic_1d=hyperbolic,
            in_region_D=curve_member,
            method=method,
        )

    kc = float(k_crit_formula(r_inf, b_inf, epsilon))
    k_crit = kc if math.isfinite(kc) else None
    k_max = k_max or scan_k_max(epsilon, k_crit)
    growth, argmax_k, last_unstable = _scan(np.array([r_inf]), np.array([b_inf]), epsilon, k_max)
    scan_member = bool(growth[0] > _GROWTH_TOL)
    k_scan = int(last_unstable[0]) or None

    if k_crit is None or k_scan is None:
        discrepancy = (k_crit is None) != (k_scan is None)
    else:
        discrepancy = abs(k_crit - k_scan) > 1.0
    if discrepancy:
        logger.info(
            "Wavenumber bound mismatch at (%g, %g): formula=%s, scan=%s.", r_inf, b_inf, k_crit, k_scan
        )
    if method is RegionMethod.CURVE and curve_member != scan_member:
        logger.info("Curve and scan disagree at (%g, %g).", r_inf, b_inf)

    return StabilityReport(
        r_inf=r_inf,
        b_inf=b_inf,
        eig_C=(lam1, lam2),
        hyperbolic_1d=hyperbolic,
        in_region_D=scan_member if method is RegionMethod.SCAN else curve_member,
        method=method,
        max_growth=float(growth[0]),
        argmax_k=int(argmax_k[0]),
        k_crit=k_crit,
        k_crit_scan=k_scan,
        discrepancy=discrepancy,
        bracketed=int(argmax_k[0]) < k_max,
    )


def simplex_samples(resolution: int) -> tuple[np.ndarray, np.ndarray]:
    """Points of a ``resolution x resolution`` grid on ``[0, 1]^2`` with ``r + b <= 1``."""
    axis = np.linspace(0.0, 1.0, resolution)
    r, b = np.meshgrid(axis, axis, indexing="ij")
    keep = r + b <= 1.0 + _SIMPLEX_TOL
    return r[keep], b[keep]


def raster_region_map(
    resolution: int,
    epsilon: float,
    method: Union[RegionMethod, str] = RegionMethod.SCAN,
    *,
    chunk: int = 4096,
) -> pd.DataFrame:
    """Classify every simplex sample of a uniform grid.

    Returns
    -------
    pandas.DataFrame
        Columns ``r, b, hyperbolic, in_D, max_growth, argmax_k`` ordered by
        ``r`` then ``b``.

    Raises
    ------
    ParameterError
        If ``resolution < 32`` or ``epsilon <= 0``.
    """
    method = RegionMethod(method)
    if resolution < _MIN_RESOLUTION:
        raise ParameterError(f"Raster resolution must be >= {_MIN_RESOLUTION}, got {resolution}.")
    if not epsilon > 0:
        raise ParameterError(f"Raster needs epsilon > 0, got {epsilon}.")

    r, b = simplex_samples(resolution)
    kc = k_crit_formula(r, b, epsilon)
    finite = kc[np.isfinite(kc)]
    k_max = scan_k_max(epsilon, float(finite.max()) if finite.size else None)

    growth = np.empty(r.size)
    argmax_k = np.empty(r.size, dtype=int)
    for start in range(0, r.size, chunk):
        sl = slice(start, start + chunk)
        g, a, _ = _scan(r[sl], b[sl], epsilon, k_max)
        growth[sl] = g
        argmax_k[sl] = a

    if method is RegionMethod.SCAN:
        in_d = growth > _GROWTH_TOL
    else:
        in_d = np.asarray(in_region_D_curve(r, b), dtype=bool)

    frame = pd.DataFrame(
        {
            "r": r,
            "b": b,
            "hyperbolic": np.asarray(classify_hyperbolic_1d(r, b), dtype=bool),
            "in_D": in_d,
            "max_growth": growth,
            "argmax_k": argmax_k,
        },
        columns=list(RASTER_COLUMNS),
    )
    logger.info("Raster %dx%d: %d samples, %d in region D.", resolution, resolution, len(frame), int(in_d.sum()))
    return frame


def elliptic_mask(resolution: int) -> np.ndarray:
    """Boolean ``resolution x resolution`` image of the non-hyperbolic set (False outside the simplex)."""
    axis = np.linspace(0.0, 1.0, resolution)
    r, b = np.meshgrid(axis, axis, indexing="ij")
    inside = r + b <= 1.0 + _SIMPLEX_TOL
    return inside & ~np.asarray(classify_hyperbolic_1d(r, b), dtype=bool)


def count_connected_regions(mask: np.ndarray) -> int:
    """Number of 4-connected components of a boolean image."""
    _, count = ndimage.label(np.asarray(mask, dtype=bool))
    return int(count)
