from __future__ import annotations

from dataclasses import dataclass
from typing import Optional, Sequence

import numpy as np


@dataclass(frozen=True)
class LinearFit:
    """Least-squares line ``y = slope * x + intercept``.

    Attributes
    ----------
    slope:
        Fitted slope.
    intercept:
        Fitted intercept.
    r2_score:
        In-sample coefficient of determination (NaN for constant ``y``).
    n_samples:
        Number of points used.
    """

    slope: float
    intercept: float
    r2_score: float
    n_samples: int


def fit_line(x: Sequence[float], y: Sequence[float]) -> LinearFit:
    """Ordinary least-squares fit of ``y`` against ``x``.

    Raises
    ------
    ValueError
        If fewer than two finite points are given or ``x`` is constant.
    """
    from sklearn.linear_model import LinearRegression  # import here to keep it optional at module level

    xa = np.asarray(x, dtype=float)
    ya = np.asarray(y, dtype=float)
    if xa.shape != ya.shape:
        raise ValueError(f"x and y must have the same shape, got {xa.shape} and {ya.shape}.")
    keep = np.isfinite(xa) & np.isfinite(ya)
    xa, ya = xa[keep], ya[keep]
    if xa.size < 2:
        raise ValueError("At least two finite points are required for a line fit.")
    if np.ptp(xa) == 0:
        raise ValueError("x must not be constant for a line fit.")

    X = xa.reshape(-1, 1)
    model = LinearRegression()
    model.fit(X, ya)
    r2 = float(model.score(X, ya)) if np.ptp(ya) > 0 else float("nan")
    return LinearFit(
        slope=float(model.coef_[0]),
        intercept=float(model.intercept_),
        r2_score=r2,
        n_samples=int(xa.size),
    )


def convergence_order(h: Sequence[float], errors: Sequence[float]) -> float:
    """Observed order ``p`` from a log-log fit ``error ~ C h^p``."""
    ha = np.asarray(h, dtype=float)
    ea = np.asarray(errors, dtype=float)
    if np.any(ha <= 0) or np.any(ea <= 0):
        raise ValueError("Mesh sizes and errors must be positive for a log-log fit.")
    return fit_line(np.log(ha), np.log(ea)).slope


def windowed_growth_rate(
    times: Sequence[float],
    norms: Sequence[float],
    lo: float,
    hi: float,
    *,
    min_points: int = 3,
) -> Optional[float]:
    """Exponential rate fitted to ``log(norm)`` where ``norm / norm[0]`` lies in ``[lo, hi]``.

    Only the first contiguous stretch inside the window is used. Returns
    ``None`` when fewer than ``min_points`` samples fall inside it.
    """
    t = np.asarray(times, dtype=float)
    v = np.asarray(norms, dtype=float)
    if v.size == 0 or v[0] <= 0:
        return None
    ratio = v / v[0]
    inside = (ratio >= lo) & (ratio <= hi)
    idx = np.flatnonzero(inside)
    if idx.size == 0:
        return None
    start = idx[0]
    stop = start
    while stop + 1 < v.size and inside[stop + 1]:
        stop += 1
    if stop - start + 1 < min_points:
        return None
    return fit_line(t[start : stop + 1], np.log(v[start : stop + 1])).slope
