"""Tests for the deterministic compartment model (src/crossflow/compartment/).

Coverage:
- Uniform states are fixed points
- Single full compartment moves one cell
- Per-species mass conservation
- Box preservation on moderate random states
- Transpose+swap equivariance (bit-exact)
- Run loop and time bookkeeping
- Box-violation scan
"""
from __future__ import annotations

import numpy as np
import pytest

from crossflow.compartment.model import (
    BoxCounterexample,
    CompartmentState,
    compartment_step,
    run_compartment,
    scan_box_violations,
)
from crossflow.core.exceptions import BoxViolationError, ParameterError
from crossflow.core.params import ModelParams
from crossflow.diagnostics.observers import MassObserver


def _params(alpha=0.5, gamma0=0.2, gamma1=0.15, gamma2=0.1, dt=0.0) -> ModelParams:
    return ModelParams(alpha=alpha, gamma0=gamma0, gamma1=gamma1, gamma2=gamma2, dt=dt)


def _make_random_state(n: int = 8, cap: float = 0.25, seed: int = 0) -> CompartmentState:
    rng = np.random.default_rng(seed)
    return CompartmentState(rng.uniform(0.0, cap, (n, n)), rng.uniform(0.0, cap, (n, n)))


# ---------------------------------------------------------------------------
# 1. Single steps
# ---------------------------------------------------------------------------


def test_uniform_state_is_unchanged():
    s = CompartmentState(np.full((6, 6), 0.3), np.full((6, 6), 0.25))
    new = compartment_step(s, _params())
    np.testing.assert_array_equal(new.r, s.r)
    np.testing.assert_array_equal(new.b, s.b)


def test_full_compartment_moves_right():
    r = np.zeros((5, 5))
    r[1, 2] = 1.0
    s = CompartmentState(r, np.zeros((5, 5)))
    new = compartment_step(s, _params(alpha=1.0, gamma0=0.0, gamma1=0.2, gamma2=0.1))
    expected = np.zeros((5, 5))
    expected[2, 2] = 1.0
    np.testing.assert_allclose(new.r, expected, atol=0.0)


def test_mass_is_conserved_per_species():
    s = _make_random_state(seed=1)
    new = compartment_step(s, _params())
    assert new.r.sum() == pytest.approx(s.r.sum(), rel=1e-13)
    assert new.b.sum() == pytest.approx(s.b.sum(), rel=1e-13)


@pytest.mark.parametrize("seed", range(5))
def test_moderate_states_stay_in_box(seed):
    s = _make_random_state(seed=seed)
    new = compartment_step(s, _params())
    assert new.r.min() >= 0.0 and new.b.min() >= 0.0
    assert (new.r + new.b).max() <= 1.0


def test_transpose_swap_equivariance_is_exact():
    s = _make_random_state(n=7, seed=3)
    p = _params()
    lhs = compartment_step(s.transposed_swapped(), p)
    rhs = compartment_step(s, p).transposed_swapped()
    np.testing.assert_array_equal(lhs.r, rhs.r)
    np.testing.assert_array_equal(lhs.b, rhs.b)


def test_step_requires_cfl():
    s = _make_random_state()
    with pytest.raises(ParameterError):
        compartment_step(s, _params(alpha=1.0, gamma0=0.5))


def test_box_violation_raises():
    # negative input makes the check fail immediately after the update
    s = CompartmentState(np.full((4, 4), -0.01), np.zeros((4, 4)))
    with pytest.raises(BoxViolationError):
        compartment_step(s, _params())


def test_time_advances_by_dt():
    s = _make_random_state()
    assert compartment_step(s, _params()).t == 1.0
    assert compartment_step(s, _params(dt=0.05)).t == pytest.approx(0.05)


def test_state_must_be_square():
    with pytest.raises(ParameterError):
        CompartmentState(np.zeros((3, 4)), np.zeros((3, 4)))


# ---------------------------------------------------------------------------
# 2. Runs
# ---------------------------------------------------------------------------


def test_zero_steps_is_identity():
    s = _make_random_state()
    result = run_compartment(s, _params(), 0, [MassObserver()])
    np.testing.assert_array_equal(result.final.r, s.r)
    assert len(result.series) == 1


def test_run_records_masses():
    s = _make_random_state(seed=5)
    result = run_compartment(s, _params(dt=0.1), 10, [MassObserver()], every=5)
    np.testing.assert_allclose(result.series.times, [0.0, 0.5, 1.0])
    m = result.series.column("M_b")
    np.testing.assert_allclose(m, m[0], rtol=1e-12)


def test_mirrored_trajectory_is_exact():
    s = _make_random_state(n=6, seed=8)
    p = _params()
    a = run_compartment(s, p, 5).final
    b = run_compartment(s.transposed_swapped(), p, 5).final
    np.testing.assert_array_equal(b.r, a.b.T)
    np.testing.assert_array_equal(b.b, a.r.T)


# ---------------------------------------------------------------------------
# 3. Box-violation scan
# ---------------------------------------------------------------------------


def test_scan_box_violations_is_seeded():
    p = _params(alpha=1.0, gamma0=0.5, gamma1=0.0, gamma2=0.0)
    first = scan_box_violations(p, trials=20, n=4, seed=2)
    second = scan_box_violations(p, trials=20, n=4, seed=2)
    assert [c.trial for c in first] == [c.trial for c in second]
    assert all(isinstance(c, BoxCounterexample) for c in first)


def test_scan_box_violations_finds_nothing_for_slow_walkers():
    p = _params(alpha=0.2, gamma0=0.1, gamma1=0.05, gamma2=0.05)
    assert scan_box_violations(p, trials=20, n=4, seed=0) == []
