from __future__ import annotations

from dataclasses import dataclass
from typing import Optional

import numpy as np
from scipy import fft as sp_fft

from crossflow.config.schema import ANISOTROPY_ZERO
from crossflow.lattice.state import LatticeState, Species


def segregation_index(state: LatticeState) -> Optional[float]:
    """Fraction of occupied nearest-neighbour pairs holding the same species.

    Each right and upper neighbour pair is counted once, with periodic wrap.
    Returns ``None`` when no two occupied cells are adjacent. A random
    50/50 placement sits near ``0.5``.
    """
    g = state.grid
    occupied = g != Species.EMPTY
    same = 0
    pairs = 0
    for axis in (0, 1):
        nb = np.roll(g, -1, axis=axis)
        both = occupied & (nb != Species.EMPTY)
        pairs += int(both.sum())
        same += int((both & (g == nb)).sum())
    if pairs == 0:
        return None
    return same / pairs


def _signed_modes(n: int) -> np.ndarray:
    return np.rint(sp_fft.fftfreq(n) * n).astype(int)


def _diagonal_masks(n: int) -> tuple[np.ndarray, np.ndarray]:
    k = _signed_modes(n)
    kx, ky = np.meshgrid(k, k, indexing="ij")
    # the Nyquist row is its own negative and belongs to neither family
    resolved = (np.abs(kx) < n / 2) & (np.abs(ky) < n / 2) & (kx != 0)
    plus = resolved & (kx == ky)
    minus = resolved & (kx == -ky)
    return plus, minus


def _power(field: np.ndarray) -> np.ndarray:
    a = np.asarray(field, dtype=float)
    if a.ndim != 2 or a.shape[0] != a.shape[1]:
        raise ValueError(f"Anisotropy needs a square 2D array, got shape {a.shape}.")
    return np.abs(sp_fft.fft2(a - a.mean())) ** 2


def diagonal_anisotropy(field: np.ndarray) -> float:
    """Normalized imbalance of Fourier power between the two diagonal families.

    ``P+`` sums the power over modes with ``kx == ky != 0`` (stripes along
    ``x + y = const``) and ``P-`` over ``kx == -ky != 0`` (stripes along
    ``x - y = const``). The result is ``(P- - P+) / (P- + P+)``, so a field
    such as ``sin(2 pi (x + y))`` gives ``-1`` and ``sin(2 pi (x - y))``
    gives ``+1``. Returns ``0`` when both sums are below ``1e-14``.
    """
    power = _power(field)
    plus_mask, minus_mask = _diagonal_masks(power.shape[0])
    p_plus = float(power[plus_mask].sum())
    p_minus = float(power[minus_mask].sum())
    if p_plus < ANISOTROPY_ZERO and p_minus < ANISOTROPY_ZERO:
        return 0.0
    return (p_minus - p_plus) / (p_minus + p_plus)


@dataclass(frozen=True)
class DiagonalMode:
    """Strongest diagonal Fourier mode of a field.

    ``kx > 0`` always; ``ky = kx`` for the ``+`` family and ``ky = -kx`` for
    the ``-`` family. ``phase`` is the argument of the Fourier coefficient.
    """

    kx: int
    ky: int
    power: float
    phase: float


def diagonal_mode(field: np.ndarray) -> DiagonalMode:
    a = np.asarray(field, dtype=float)
    spectrum = sp_fft.fft2(a - a.mean())
    power = np.abs(spectrum) ** 2
    plus_mask, minus_mask = _diagonal_masks(a.shape[0])
    k = _signed_modes(a.shape[0])
    kx, ky = np.meshgrid(k, k, indexing="ij")
    candidates = (plus_mask | minus_mask) & (kx > 0)
    flat = np.flatnonzero(candidates.ravel())
    best = flat[np.argmax(power.ravel()[flat])]
    i, j = np.unravel_index(best, a.shape)
    return DiagonalMode(
        kx=int(kx[i, j]),
        ky=int(ky[i, j]),
        power=float(power[i, j]),
        phase=float(np.angle(spectrum[i, j])),
    )


def coarse_grain(field: np.ndarray, factor: int) -> np.ndarray:
    """Block means over ``factor x factor`` tiles."""
    a = np.asarray(field, dtype=float)
    n0, n1 = a.shape
    if factor < 1 or n0 % factor or n1 % factor:
        raise ValueError(f"Shape {a.shape} is not divisible into {factor}x{factor} blocks.")
    return a.reshape(n0 // factor, factor, n1 // factor, factor).mean(axis=(1, 3))
