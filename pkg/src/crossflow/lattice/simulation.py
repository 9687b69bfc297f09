from __future__ import annotations

import logging
from dataclasses import dataclass
from typing import Callable, Iterable, Optional

import numpy as np

from crossflow.core.exceptions import ParameterError
from crossflow.core.params import ModelParams, validate_cfl
from crossflow.diagnostics.observers import BaseObserver, ObserverSet
from crossflow.diagnostics.series import DiagnosticsSeries
from crossflow.lattice.state import LatticeState, Scheduler, Species
from crossflow.lattice.transitions import move_probability_fields

logger = logging.getLogger(__name__)

# (di, dj) per move, in the order returned by move_probability_fields
_RED_OFFSETS = np.array([(1, 0), (0, -1), (0, 1)])
_BLUE_OFFSETS = np.array([(0, 1), (-1, 0), (1, 0)])
_STAY = 3


def _step_synchronous(state: LatticeState, p: ModelParams, rng: np.random.Generator) -> np.ndarray:
    n = state.n
    flat = state.grid.ravel()
    red_fields, blue_fields = move_probability_fields(state.grid, p)

    red_idx = np.flatnonzero(flat == Species.RED)
    blue_idx = np.flatnonzero(flat == Species.BLUE)
    src = np.concatenate([red_idx, blue_idx])
    species = flat[src]
    probs = np.vstack([red_fields.reshape(-1, 3)[red_idx], blue_fields.reshape(-1, 3)[blue_idx]])
    offsets = np.concatenate(
        [np.broadcast_to(_RED_OFFSETS, (red_idx.size, 3, 2)), np.broadcast_to(_BLUE_OFFSETS, (blue_idx.size, 3, 2))]
    )

    u = rng.random(src.size)
    # move k is taken iff cum[k-1] <= u < cum[k]
    choice = (u[:, None] >= np.cumsum(probs, axis=1)).sum(axis=1)
    movers = np.flatnonzero(choice < _STAY)

    new = flat.copy()
    if movers.size == 0:
        return new.reshape(n, n)

    i, j = np.divmod(src[movers], n)
    d = offsets[movers, choice[movers]]
    target = ((i + d[:, 0]) % n) * n + (j + d[:, 1]) % n

    # targets are empty at time t, so the only conflicts are shared targets:
    # the highest random priority wins, losers stay
    priority = rng.random(movers.size)
    order = np.lexsort((priority, target))
    sorted_target = target[order]
    last_of_group = np.append(sorted_target[1:] != sorted_target[:-1], True)
    winners = order[last_of_group]

    new[src[movers[winners]]] = Species.EMPTY
    new[target[winners]] = species[movers[winners]]
    return new.reshape(n, n)


def _step_random_sequential(state: LatticeState, p: ModelParams, rng: np.random.Generator) -> np.ndarray:
    n = state.n
    g = state.grid.ravel().tolist()
    order = rng.permutation(np.flatnonzero(state.grid.ravel())).tolist()
    draws = rng.random(len(order)).tolist()
    a, g0, g1, g2 = p.alpha, p.gamma0, p.gamma1, p.gamma2

    for pos, u in zip(order, draws):
        i, j = divmod(pos, n)
        s = g[pos]
        if s == Species.RED:
            ahead = ((i + 1) % n) * n + j
            side_a = i * n + (j - 1) % n
            side_b = i * n + (j + 1) % n
            bonus = 1.0 if g[ahead] == Species.BLUE else 0.0
        else:
            ahead = i * n + (j + 1) % n
            side_a = ((i - 1) % n) * n + j
            side_b = ((i + 1) % n) * n + j
            bonus = 1.0 if g[ahead] == Species.RED else 0.0

        p_ahead = a if g[ahead] == 0 else 0.0
        p_a = a * (g0 + g1 * bonus) if g[side_a] == 0 else 0.0
        p_b = a * (g0 + g2 * bonus) if g[side_b] == 0 else 0.0

        if u < p_ahead:
            target = ahead
        elif u < p_ahead + p_a:
            target = side_a
        elif u < p_ahead + p_a + p_b:
            target = side_b
        else:
            continue
        g[target] = s
        g[pos] = Species.EMPTY

    return np.asarray(g, dtype=np.int8).reshape(n, n)


def step(
    state: LatticeState,
    p: ModelParams,
    scheduler: Scheduler = Scheduler.SYNCHRONOUS,
) -> LatticeState:
    """Advance the lattice by one time step.

    ``SYNCHRONOUS`` samples every move from the time-t occupancy; walkers
    aiming at the same empty cell are resolved by a uniformly random winner
    and the others stay. ``RANDOM_SEQUENTIAL`` visits walkers in a fresh
    random order against the partially updated occupancy.

    Raises
    ------
    ParameterError
        If ``p`` violates the CFL condition.
    """
    if not validate_cfl(p):
        raise ParameterError(
            f"alpha * max(1, 2*gamma0 + gamma1 + gamma2) = "
            f"{p.alpha * max(1.0, p.side_step_total):.6g} > 1 violates the CFL condition."
        )
    rng = state.generator()
    scheduler = Scheduler(scheduler)
    if scheduler is Scheduler.SYNCHRONOUS:
        grid = _step_synchronous(state, p, rng)
    else:
        grid = _step_random_sequential(state, p, rng)
    return LatticeState(grid=grid, step_count=state.step_count + 1, rng_state=rng.bit_generator.state)


@dataclass(frozen=True)
class LatticeRun:
    final: LatticeState
    series: DiagnosticsSeries


def run(
    initial: LatticeState,
    p: ModelParams,
    scheduler: Scheduler,
    steps: int,
    observers: Optional[Iterable[BaseObserver]] = None,
    *,
    every: int = 1,
    snapshot_every: int = 0,
    on_snapshot: Optional[Callable[[LatticeState], None]] = None,
) -> LatticeRun:
    """Apply :func:`step` ``steps`` times, sampling observers every ``every`` steps.

    Time is measured in steps. Observers are evaluated on the initial state,
    every ``every`` steps and on the final state; ``on_snapshot`` receives the
    initial state and every ``snapshot_every``-th state.
    """
    if steps < 0:
        raise ParameterError(f"steps must be >= 0, got {steps}.")
    if every < 1:
        raise ParameterError(f"every must be >= 1, got {every}.")

    observer_set = ObserverSet(observers or [])
    series = DiagnosticsSeries()
    state = initial

    def _record(s: LatticeState) -> None:
        series.append(float(s.step_count), observer_set.collect(s, float(s.step_count)))

    _record(state)
    if on_snapshot is not None and snapshot_every > 0:
        on_snapshot(state)

    for k in range(1, steps + 1):
        state = step(state, p, scheduler)
        if k % every == 0 or k == steps:
            _record(state)
        if on_snapshot is not None and snapshot_every > 0 and k % snapshot_every == 0:
            on_snapshot(state)

    logger.info(
        "Lattice run finished: %d steps, red=%d, blue=%d.", steps, state.red_count, state.blue_count
    )
    return LatticeRun(final=state, series=series)
