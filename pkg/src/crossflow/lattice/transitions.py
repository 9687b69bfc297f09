from __future__ import annotations

from typing import NamedTuple

import numpy as np

from crossflow.core.exceptions import LatticeError
from crossflow.core.params import ModelParams
from crossflow.lattice.state import LatticeState, Species


class RedMoveProbs(NamedTuple):
    p_right: float
    p_down: float
    p_up: float
    p_stay: float


class BlueMoveProbs(NamedTuple):
    p_up: float
    p_left: float
    p_right: float
    p_stay: float


def _stay(*moves: float) -> float:
    # the CFL slack may leave a tiny negative remainder
    return max(0.0, 1.0 - sum(moves))


def transition_probs_red(state: LatticeState, i: int, j: int, p: ModelParams) -> RedMoveProbs:
    """Move probabilities of the red walker at ``(i, j)`` (periodic indices).

    Raises
    ------
    LatticeError
        If the cell does not hold a red walker.
    """
    g = state.grid
    n = state.n
    i, j = i % n, j % n
    if g[i, j] != Species.RED:
        raise LatticeError(f"Cell ({i}, {j}) holds {Species(int(g[i, j])).name}, expected RED.")

    ahead = g[(i + 1) % n, j]
    below = g[i, (j - 1) % n]
    above = g[i, (j + 1) % n]
    blue_ahead = 1.0 if ahead == Species.BLUE else 0.0

    p_right = p.alpha * (ahead == Species.EMPTY)
    p_down = p.alpha * (below == Species.EMPTY) * (p.gamma0 + p.gamma1 * blue_ahead)
    p_up = p.alpha * (above == Species.EMPTY) * (p.gamma0 + p.gamma2 * blue_ahead)
    return RedMoveProbs(float(p_right), float(p_down), float(p_up), _stay(p_right, p_down, p_up))


def transition_probs_blue(state: LatticeState, i: int, j: int, p: ModelParams) -> BlueMoveProbs:
    """Move probabilities of the blue walker at ``(i, j)``; mirror image of the red rule."""
    g = state.grid
    n = state.n
    i, j = i % n, j % n
    if g[i, j] != Species.BLUE:
        raise LatticeError(f"Cell ({i}, {j}) holds {Species(int(g[i, j])).name}, expected BLUE.")

    ahead = g[i, (j + 1) % n]
    left = g[(i - 1) % n, j]
    right = g[(i + 1) % n, j]
    red_ahead = 1.0 if ahead == Species.RED else 0.0

    p_up = p.alpha * (ahead == Species.EMPTY)
    p_left = p.alpha * (left == Species.EMPTY) * (p.gamma0 + p.gamma1 * red_ahead)
    p_right = p.alpha * (right == Species.EMPTY) * (p.gamma0 + p.gamma2 * red_ahead)
    return BlueMoveProbs(float(p_up), float(p_left), float(p_right), _stay(p_up, p_left, p_right))


def move_probability_fields(grid: np.ndarray, p: ModelParams) -> tuple[np.ndarray, np.ndarray]:
    """Whole-lattice move probabilities evaluated on one occupancy.

    Returns
    -------
    tuple
        ``(red, blue)`` arrays of shape ``(n, n, 3)``. For red the last axis is
        ``(right, down, up)``; for blue ``(up, left, right)``. Entries are zero
        on cells not holding that species.
    """
    empty = (grid == Species.EMPTY).astype(float)
    is_red = (grid == Species.RED).astype(float)
    is_blue = (grid == Species.BLUE).astype(float)

    # value at (i+1, j) / (i-1, j) / (i, j+1) / (i, j-1)
    def east(a: np.ndarray) -> np.ndarray:
        return np.roll(a, -1, axis=0)

    def west(a: np.ndarray) -> np.ndarray:
        return np.roll(a, 1, axis=0)

    def north(a: np.ndarray) -> np.ndarray:
        return np.roll(a, -1, axis=1)

    def south(a: np.ndarray) -> np.ndarray:
        return np.roll(a, 1, axis=1)

    a = p.alpha
    blue_ahead = east(is_blue)
    red = np.stack(
        [
            a * east(empty),
            a * south(empty) * (p.gamma0 + p.gamma1 * blue_ahead),
            a * north(empty) * (p.gamma0 + p.gamma2 * blue_ahead),
        ],
        axis=-1,
    ) * is_red[..., None]

    red_ahead = north(is_red)
    blue = np.stack(
        [
            a * north(empty),
            a * west(empty) * (p.gamma0 + p.gamma1 * red_ahead),
            a * east(empty) * (p.gamma0 + p.gamma2 * red_ahead),
        ],
        axis=-1,
    ) * is_blue[..., None]
    return red, blue
