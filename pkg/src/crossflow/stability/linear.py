from __future__ import annotations

from typing import Union

import numpy as np

from crossflow.config.schema import HYPERBOLIC_TOL
from crossflow.core.params import ModelParams

ArrayLike = Union[float, np.ndarray]


def matrices_2d(r: ArrayLike, b: ArrayLike, p: ModelParams) -> tuple[np.ndarray, np.ndarray]:
    """Coefficient matrices ``A`` and ``B`` of the first-order 2D system.

    Shapes are ``(..., 2, 2)`` following the broadcast shape of ``r`` and ``b``.
    """
    r = np.asarray(r, dtype=float)
    b = np.asarray(b, dtype=float)
    r, b = np.broadcast_arrays(r, b)
    g = p.gamma1 - p.gamma2
    side_r = g * b * (1.0 - 2.0 * r - b)
    side_b = g * r * (1.0 - r - 2.0 * b)

    A = np.empty(r.shape + (2, 2))
    A[..., 0, 0] = 2.0 * r + b - 1.0
    A[..., 0, 1] = r
    A[..., 1, 0] = side_r
    A[..., 1, 1] = side_b

    B = np.empty(r.shape + (2, 2))
    B[..., 0, 0] = side_r
    B[..., 0, 1] = side_b
    B[..., 1, 0] = b
    B[..., 1, 1] = r + 2.0 * b - 1.0
    return A, B


def matrix_c_1d(r: ArrayLike, b: ArrayLike) -> np.ndarray:
    r = np.asarray(r, dtype=float)
    b = np.asarray(b, dtype=float)
    r, b = np.broadcast_arrays(r, b)
    C = np.empty(r.shape + (2, 2))
    C[..., 0, 0] = 2.0 * r + b - 1.0
    C[..., 0, 1] = r
    C[..., 1, 0] = -b
    C[..., 1, 1] = 1.0 - r - 2.0 * b
    return C


def discriminant_1d(r: ArrayLike, b: ArrayLike) -> np.ndarray:
    """``(r - b)^2 / 4 + (1 - rho)(1 - 2 rho)``."""
    r = np.asarray(r, dtype=float)
    b = np.asarray(b, dtype=float)
    rho = r + b
    return (r - b) ** 2 / 4.0 + (1.0 - rho) * (1.0 - 2.0 * rho)


def eig_C_1d(r: ArrayLike, b: ArrayLike, tol: float = HYPERBOLIC_TOL) -> tuple[np.ndarray, np.ndarray]:
    """Eigenvalues ``(r - b)/2 +- sqrt(disc)`` of the 1D matrix ``C`` as complex arrays.

    Discriminants in ``[-tol, 0)`` are treated as zero.
    """
    r = np.asarray(r, dtype=float)
    b = np.asarray(b, dtype=float)
    disc = discriminant_1d(r, b)
    disc = np.where((disc < 0) & (disc >= -tol), 0.0, disc)
    root = np.sqrt(disc.astype(complex))
    centre = (r - b) / 2.0
    lam1 = centre + root
    lam2 = centre - root
    if lam1.ndim == 0:
        return complex(lam1), complex(lam2)
    return lam1, lam2


def classify_hyperbolic_1d(r: ArrayLike, b: ArrayLike, tol: float = HYPERBOLIC_TOL) -> Union[bool, np.ndarray]:
    """True where ``C`` has real eigenvalues (discriminant ``>= -tol``)."""
    out = discriminant_1d(r, b) >= -tol
    return bool(out) if np.ndim(out) == 0 else out


def spectral_radius_2x2(M: np.ndarray) -> np.ndarray:
    """Largest eigenvalue modulus of real ``(..., 2, 2)`` matrices."""
    tr = M[..., 0, 0] + M[..., 1, 1]
    det = M[..., 0, 0] * M[..., 1, 1] - M[..., 0, 1] * M[..., 1, 0]
    disc = tr**2 / 4.0 - det
    real_root = np.sqrt(np.maximum(disc, 0.0))
    real_radius = np.abs(tr) / 2.0 + real_root
    # a complex pair has modulus sqrt(det)
    complex_radius = np.sqrt(np.maximum(det, 0.0))
    return np.where(disc >= 0, real_radius, complex_radius)


def hyperbolic_2d(
    r: ArrayLike,
    b: ArrayLike,
    p: ModelParams,
    n_theta: int = 64,
    tol: float = HYPERBOLIC_TOL,
) -> Union[bool, np.ndarray]:
    """True where every ``cos(theta) A + sin(theta) B`` on an ``n_theta`` grid has real eigenvalues."""
    A, B = matrices_2d(r, b, p)
    theta = np.linspace(0.0, np.pi, n_theta, endpoint=False)
    c = np.cos(theta)[:, None, None]
    s = np.sin(theta)[:, None, None]
    M = c * A[..., None, :, :] + s * B[..., None, :, :]
    tr = M[..., 0, 0] + M[..., 1, 1]
    det = M[..., 0, 0] * M[..., 1, 1] - M[..., 0, 1] * M[..., 1, 0]
    ok = np.all(tr**2 / 4.0 - det >= -tol, axis=-1)
    return bool(ok) if np.ndim(ok) == 0 else ok


def dispersion_hyperbolic(r: ArrayLike, b: ArrayLike, k: ArrayLike) -> tuple[np.ndarray, np.ndarray]:
    """Frequencies ``i k pi mu`` with ``mu`` the eigenvalues of ``C``."""
    lam1, lam2 = eig_C_1d(r, b)
    factor = 1j * np.pi * np.asarray(k, dtype=float)
    return factor * lam1, factor * lam2


def parabolic_coefficients(
    r: ArrayLike, b: ArrayLike, k: ArrayLike, epsilon: float
) -> tuple[np.ndarray, np.ndarray]:
    """``(c1, c0)`` with ``p(lambda) = lambda^2 + c1 lambda + c0`` for the regularized 1D system."""
    r = np.asarray(r, dtype=float)
    b = np.asarray(b, dtype=float)
    k = np.asarray(k, dtype=float)
    rho = r + b
    kp = k * np.pi
    c1 = -(1j * kp * (r - b) - epsilon * kp**2 * (2.0 - rho))
    c0 = (
        kp**2 * (1.0 - 2.0 * rho) * (1.0 - rho)
        - 2j * epsilon * kp**3 * (1.0 - rho) * (r - b)
        + epsilon**2 * kp**4 * (1.0 - rho)
    )
    return c1, c0


def dispersion_parabolic(
    r: ArrayLike, b: ArrayLike, k: ArrayLike, epsilon: float
) -> tuple[np.ndarray, np.ndarray]:
    """Both roots of the characteristic polynomial of the regularized linearization.

    Arguments broadcast against each other. The first root is the one of
    larger modulus.
    """
    c1, c0 = parabolic_coefficients(r, b, k, epsilon)
    c1, c0 = np.broadcast_arrays(np.asarray(c1, dtype=complex), np.asarray(c0, dtype=complex))
    s = np.sqrt(c1 * c1 - 4.0 * c0)
    # pick the branch that avoids cancellation in c1 + s
    s = np.where((np.conj(c1) * s).real >= 0, s, -s)
    q = -(c1 + s) / 2.0
    safe_q = np.where(q == 0, 1.0, q)
    other = np.where(q == 0, 0.0, c0 / safe_q)
    if q.ndim == 0:
        return complex(q), complex(other)
    return q, other


def max_growth_parabolic(r: ArrayLike, b: ArrayLike, k: ArrayLike, epsilon: float) -> np.ndarray:
    """``max(Re lambda)`` over both branches, broadcast like the arguments."""
    lam1, lam2 = dispersion_parabolic(r, b, k, epsilon)
    return np.maximum(np.real(lam1), np.real(lam2))
