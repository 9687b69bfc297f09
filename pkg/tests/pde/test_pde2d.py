"""Tests for the 2D finite-volume solver (src/crossflow/pde/).

Coverage:
- Fluxes on uniform and vacuum states (hand-computed values)
- Ghost cells for periodic and mixed boundaries
- Mixed boundaries rejected in hyperbolic mode
- Constant-state exactness, mass conservation, swap-transpose equivariance
- Small-epsilon consistency with the hyperbolic solution
- Stable time step and integration loop
"""
from __future__ import annotations

import math

import numpy as np
import pytest

from crossflow.core.exceptions import BoundaryConditionError, DensityBoundsError, ParameterError
from crossflow.core.grid import Grid, MixedBoundary
from crossflow.core.params import ModelParams
from crossflow.diagnostics.observers import MassObserver
from crossflow.pde.boundary import Mode, apply_boundary
from crossflow.pde.fields import DensityField2D
from crossflow.pde.fluxes import eval_fluxes
from crossflow.pde.solver2d import dt_stable, perturbed_state_2d, run_2d, step_2d


def _params(gamma0=0.2, gamma1=0.15, gamma2=0.1, epsilon=0.05) -> ModelParams:
    return ModelParams(alpha=1.0, gamma0=gamma0, gamma1=gamma1, gamma2=gamma2, epsilon=epsilon)


def _make_smooth_state(n: int = 16, bc=None) -> DensityField2D:
    grid = Grid(dims=2, n=n, bc=bc) if bc is not None else Grid(dims=2, n=n)
    x, y = grid.mesh()
    r = 0.3 + 0.05 * np.sin(2 * math.pi * x) * np.cos(2 * math.pi * y)
    b = 0.25 + 0.05 * np.cos(2 * math.pi * x) + 0.03 * np.sin(2 * math.pi * y)
    return DensityField2D(r, b, grid)


# ---------------------------------------------------------------------------
# 1. Fluxes
# ---------------------------------------------------------------------------


@pytest.mark.parametrize("mode", list(Mode))
def test_uniform_fluxes(mode):
    s = DensityField2D.uniform(Grid(dims=2, n=8), 0.4, 0.4)
    f = eval_fluxes(s, _params(), mode)
    np.testing.assert_allclose(f.red_x, 0.08, rtol=1e-12)
    np.testing.assert_allclose(f.red_y, -0.0016, rtol=1e-12)
    np.testing.assert_allclose(f.blue_y, 0.08, rtol=1e-12)
    np.testing.assert_allclose(f.blue_x, -0.0016, rtol=1e-12)
    assert f.red_x.shape == (9, 8) and f.red_y.shape == (8, 9)


def test_vacuum_has_zero_flux():
    s = DensityField2D.uniform(Grid(dims=2, n=6), 0.0, 0.0)
    f = eval_fluxes(s, _params(), Mode.PARABOLIC)
    for arr in (f.red_x, f.red_y, f.blue_x, f.blue_y):
        assert np.all(arr == 0.0)


def test_equal_side_steps_cancel_coupling():
    s = DensityField2D.uniform(Grid(dims=2, n=6), 0.3, 0.2)
    f = eval_fluxes(s, _params(gamma1=0.1, gamma2=0.1), Mode.HYPERBOLIC)
    np.testing.assert_allclose(f.red_x, 0.5 * 0.3)
    np.testing.assert_allclose(f.blue_y, 0.5 * 0.2)
    assert np.all(f.red_y == 0.0) and np.all(f.blue_x == 0.0)


# ---------------------------------------------------------------------------
# 2. Boundaries
# ---------------------------------------------------------------------------


def test_periodic_ghosts_wrap_around():
    s = _make_smooth_state(n=6)
    g = apply_boundary(s.r, s.b, s.grid.bc, Mode.PARABOLIC)
    np.testing.assert_array_equal(g.r[0, 1:-1], s.r[-1, :])
    np.testing.assert_array_equal(g.b[1:-1, -1], s.b[:, 0])


def test_mixed_ghosts_hold_inflow():
    s = _make_smooth_state(n=6, bc=MixedBoundary(inflow=0.1, outflux=0.8))
    g = apply_boundary(s.r, s.b, s.grid.bc, Mode.PARABOLIC)
    assert np.all(g.r[0, :] == 0.1)
    assert np.all(g.b[:, 0] == 0.1)
    np.testing.assert_array_equal(g.r[-1, 1:-1], s.r[-1, :])


def test_mixed_rejected_in_hyperbolic_mode():
    s = _make_smooth_state(n=6, bc=MixedBoundary())
    with pytest.raises(BoundaryConditionError):
        eval_fluxes(s, _params(), Mode.HYPERBOLIC)


def test_mixed_zero_state_only_entrances_carry_flux():
    grid = Grid(dims=2, n=8, bc=MixedBoundary(inflow=0.1, outflux=0.8))
    f = eval_fluxes(DensityField2D.uniform(grid, 0.0, 0.0), _params(), Mode.PARABOLIC)
    assert np.all(f.red_x[0, :] > 0.0)
    assert np.all(f.blue_y[:, 0] > 0.0)
    for face in (f.red_x[-1, :], f.red_y[:, 0], f.red_y[:, -1], f.blue_y[:, -1], f.blue_x[0, :], f.blue_x[-1, :]):
        assert np.all(face == 0.0)


def test_mixed_exit_flux_is_outflux_times_density():
    s = _make_smooth_state(n=8, bc=MixedBoundary(inflow=0.1, outflux=0.8))
    f = eval_fluxes(s, _params(), Mode.PARABOLIC)
    np.testing.assert_allclose(f.red_x[-1, :], 0.8 * s.r[-1, :])
    np.testing.assert_allclose(f.blue_y[:, -1], 0.8 * s.b[:, -1])


# ---------------------------------------------------------------------------
# 3. Steps
# ---------------------------------------------------------------------------


@pytest.mark.parametrize("mode", list(Mode))
def test_uniform_state_is_a_fixed_point(mode):
    s = DensityField2D.uniform(Grid(dims=2, n=8), 0.35, 0.2)
    new = step_2d(s, _params(), mode, 0.01)
    np.testing.assert_allclose(new.r, 0.35, atol=1e-15)
    np.testing.assert_allclose(new.b, 0.2, atol=1e-15)
    assert new.t == 0.01


@pytest.mark.parametrize("mode", list(Mode))
def test_periodic_step_conserves_mass(mode):
    s = _make_smooth_state()
    p = _params()
    dt = dt_stable(s, p, mode)
    for _ in range(10):
        s2 = step_2d(s, p, mode, dt)
        assert s2.mass_r == pytest.approx(s.mass_r, rel=1e-12)
        assert s2.mass_b == pytest.approx(s.mass_b, rel=1e-12)
        s = s2


@pytest.mark.parametrize("mode", list(Mode))
def test_swap_transpose_equivariance_is_exact(mode):
    s = _make_smooth_state()
    p = _params()
    dt = 0.5 * dt_stable(s, p, mode)
    lhs = step_2d(s.transposed_swapped(), p, mode, dt)
    rhs = step_2d(s, p, mode, dt).transposed_swapped()
    np.testing.assert_array_equal(lhs.r, rhs.r)
    np.testing.assert_array_equal(lhs.b, rhs.b)


def test_step_rejects_nonpositive_dt():
    with pytest.raises(ParameterError):
        step_2d(_make_smooth_state(), _params(), Mode.PARABOLIC, 0.0)


def test_huge_step_aborts_on_bounds():
    s = _make_smooth_state()
    with pytest.raises(DensityBoundsError):
        step_2d(s, _params(), Mode.PARABOLIC, 50.0)


def test_dt_stable_respects_diffusion_limit():
    s = _make_smooth_state(n=16)
    p = _params(epsilon=0.05)
    h = s.grid.h
    assert dt_stable(s, p, Mode.PARABOLIC) <= 0.4 * h * h / (4 * 0.05) + 1e-15
    assert dt_stable(s, p, Mode.HYPERBOLIC) <= 0.4 * h
    assert dt_stable(s, p, Mode.PARABOLIC) < dt_stable(s, p, Mode.HYPERBOLIC)


def test_small_epsilon_approaches_hyperbolic_solution():
    s = _make_smooth_state(n=32)
    t_end = 0.1
    hyper = run_2d(s, _params(gamma1=0.1, gamma2=0.1, epsilon=0.0), Mode.HYPERBOLIC, t_end).final
    distances = []
    for eps in (0.05, 0.025, 0.0125):
        para = run_2d(s, _params(gamma1=0.1, gamma2=0.1, epsilon=eps), Mode.PARABOLIC, t_end).final
        distances.append(float((np.abs(para.r - hyper.r) + np.abs(para.b - hyper.b)).sum() * s.grid.cell_volume))
    assert distances[0] > distances[1] > distances[2]


# ---------------------------------------------------------------------------
# 4. Runs
# ---------------------------------------------------------------------------


def test_run_samples_at_requested_times():
    s = _make_smooth_state(n=8)
    result = run_2d(s, _params(), Mode.PARABOLIC, 0.5, [MassObserver()], sample_every=0.1)
    np.testing.assert_allclose(result.series.times, [0.0, 0.1, 0.2, 0.3, 0.4, 0.5], atol=1e-12)
    assert result.final.t == pytest.approx(0.5)
    assert result.max_mass_drift <= 1e-10
    assert not result.exploratory


def test_run_snapshots_every_stride():
    s = _make_smooth_state(n=8)
    seen: list[float] = []
    run_2d(
        s, _params(), Mode.PARABOLIC, 0.4, sample_every=0.1, snapshot_stride=2, on_snapshot=lambda f: seen.append(f.t)
    )
    np.testing.assert_allclose(seen, [0.0, 0.2, 0.4], atol=1e-12)


def test_perturbed_state_matches_formula():
    grid = Grid(dims=2, n=10)
    s = perturbed_state_2d(grid, 0.4, 0.4, 0.02)
    x, y = grid.mesh()
    np.testing.assert_allclose(s.r, 0.4 + 0.02 * np.cos(math.pi * x) * np.sin(math.pi * y))
    np.testing.assert_allclose(s.b, 0.4 + 0.02 * np.sin(math.pi * x) * np.cos(math.pi * y))
