"""Tests for src/crossflow/stability/: hyperbolicity, dispersion relations and region D."""
from __future__ import annotations

import math

import numpy as np
import pandas as pd
import pytest

from crossflow.config.schema import RASTER_COLUMNS
from crossflow.core.exceptions import ParameterError
from crossflow.core.params import ModelParams
from crossflow.stability.linear import (
    classify_hyperbolic_1d,
    discriminant_1d,
    dispersion_hyperbolic,
    dispersion_parabolic,
    eig_C_1d,
    hyperbolic_2d,
    matrices_2d,
    matrix_c_1d,
    max_growth_parabolic,
    parabolic_coefficients,
    spectral_radius_2x2,
)
from crossflow.stability.region import (
    RegionMethod,
    count_connected_regions,
    elliptic_mask,
    in_region_D_curve,
    k_crit_formula,
    raster_region_map,
    region_D_membership,
    scan_k_max,
    simplex_samples,
)

EPS = 0.005


# ---------------------------------------------------------------------------
# 1. First-order systems
# ---------------------------------------------------------------------------


@pytest.mark.parametrize(
    ("r", "b", "hyperbolic"),
    [(0.0, 0.0, True), (0.3, 0.3, False), (0.4, 0.4, False), (0.85, 0.1, True), (0.2, 0.2, True)],
)
def test_classify_hyperbolic_1d(r, b, hyperbolic):
    assert classify_hyperbolic_1d(r, b) is hyperbolic


def test_discriminant_values():
    assert discriminant_1d(0.3, 0.3) == pytest.approx(-0.08)
    assert discriminant_1d(0.85, 0.1) == pytest.approx(0.5175)


def test_vacuum_eigenvalues():
    lam1, lam2 = eig_C_1d(0.0, 0.0)
    assert lam1 == pytest.approx(1.0)
    assert lam2 == pytest.approx(-1.0)


def test_eigenvalues_complex_in_elliptic_region():
    lam1, lam2 = eig_C_1d(0.3, 0.3)
    assert lam1.imag == pytest.approx(math.sqrt(0.08))
    assert lam2 == pytest.approx(lam1.conjugate())


def test_eigenvalues_vectorized():
    r = np.array([0.0, 0.3])
    lam1, _ = eig_C_1d(r, r)
    assert lam1.shape == (2,)


def _simplex_points(count: int, seed: int) -> tuple[np.ndarray, np.ndarray]:
    u = np.random.default_rng(seed).random((count, 2))
    flip = u.sum(axis=1) > 1.0
    u[flip] = 1.0 - u[flip]
    return u[:, 0], u[:, 1]


def test_eigenvalues_solve_characteristic_polynomial():
    r, b = _simplex_points(10_000, seed=1)
    C = matrix_c_1d(r, b)
    tr = C[:, 0, 0] + C[:, 1, 1]
    det = C[:, 0, 0] * C[:, 1, 1] - C[:, 0, 1] * C[:, 1, 0]
    for lam in eig_C_1d(r, b):
        np.testing.assert_allclose(np.abs(lam**2 - tr * lam + det), 0.0, atol=1e-10)


def test_eigenvalues_flip_sign_when_species_swap():
    r, b = _simplex_points(200, seed=2)
    lam1, lam2 = eig_C_1d(r, b)
    mu1, mu2 = eig_C_1d(b, r)
    np.testing.assert_allclose(lam1, -mu2, atol=1e-12)
    np.testing.assert_allclose(lam2, -mu1, atol=1e-12)


def test_matrices_2d_entries():
    p = ModelParams(alpha=1.0, gamma0=0.0, gamma1=0.2, gamma2=0.1)
    A, B = matrices_2d(0.3, 0.2, p)
    assert A[0, 0] == pytest.approx(2 * 0.3 + 0.2 - 1)
    assert A[0, 1] == pytest.approx(0.3)
    assert A[1, 0] == pytest.approx(0.1 * 0.2 * (1 - 0.6 - 0.2))
    assert B[1, 1] == pytest.approx(0.3 + 0.4 - 1)
    assert B[1, 0] == pytest.approx(0.2)
    np.testing.assert_allclose(A[1, :], B[0, :])


def test_hyperbolic_2d_low_density_without_coupling():
    p = ModelParams(alpha=1.0, gamma0=0.0, gamma1=0.1, gamma2=0.1)
    assert hyperbolic_2d(0.2, 0.2, p) is True
    mask = hyperbolic_2d(np.array([0.1, 0.2]), np.array([0.1, 0.2]), p)
    assert mask.shape == (2,) and mask.all()


@pytest.mark.parametrize(
    ("matrix", "radius"),
    [([[2.0, 0.0], [0.0, -3.0]], 3.0), ([[0.0, 1.0], [-1.0, 0.0]], 1.0), ([[1.0, 1.0], [0.0, 1.0]], 1.0)],
)
def test_spectral_radius(matrix, radius):
    assert float(spectral_radius_2x2(np.array(matrix))) == pytest.approx(radius)


# ---------------------------------------------------------------------------
# 2. Dispersion relations
# ---------------------------------------------------------------------------


def test_hyperbolic_dispersion_grows_in_elliptic_region():
    w1, w2 = dispersion_hyperbolic(0.3, 0.3, 1)
    assert max(w1.real, w2.real) == pytest.approx(math.pi * math.sqrt(0.08))
    w1, w2 = dispersion_hyperbolic(0.85, 0.1, 1)
    assert w1.real == pytest.approx(0.0, abs=1e-12) and w2.real == pytest.approx(0.0, abs=1e-12)


def test_parabolic_roots_solve_characteristic_polynomial():
    k = np.arange(1, 40)
    c1, c0 = parabolic_coefficients(0.3, 0.25, k, EPS)
    lam1, lam2 = dispersion_parabolic(0.3, 0.25, k, EPS)
    for lam in (lam1, lam2):
        residual = lam**2 + c1 * lam + c0
        np.testing.assert_allclose(np.abs(residual), 0.0, atol=1e-8 * np.max(np.abs(c0)))


def test_parabolic_growth_tends_to_hyperbolic_limit():
    growth = float(max_growth_parabolic(0.3, 0.3, 1, 1e-9))
    assert growth == pytest.approx(math.pi * math.sqrt(0.08), rel=1e-5)


def test_parabolic_growth_sign():
    assert float(max_growth_parabolic(0.3, 0.3, 2, EPS)) > 0.0
    assert float(max_growth_parabolic(0.85, 0.1, 2, EPS)) < 0.0


def test_short_waves_are_damped():
    assert float(max_growth_parabolic(0.3, 0.3, 200, EPS)) < 0.0


def test_stable_state_is_damped_at_every_wavenumber():
    growth = max_growth_parabolic(0.85, 0.1, np.arange(1, 201), EPS)
    assert growth.shape == (200,)
    assert growth.max() <= 0.0


def test_opposite_wavenumbers_give_conjugate_roots():
    r, b = _simplex_points(200, seed=3)
    k = np.random.default_rng(4).integers(1, 50, size=200)
    a1, a2 = dispersion_parabolic(r, b, k, EPS)
    m1, m2 = dispersion_parabolic(r, b, -k, EPS)
    c1, c2 = np.conj(a1), np.conj(a2)
    straight = np.abs(m1 - c1) + np.abs(m2 - c2)
    crossed = np.abs(m1 - c2) + np.abs(m2 - c1)
    scale = 1.0 + np.abs(a1) + np.abs(a2)
    assert np.all(np.minimum(straight, crossed) <= 1e-9 * scale)


# ---------------------------------------------------------------------------
# 3. Region D
# ---------------------------------------------------------------------------


def test_k_crit_formula_value():
    assert float(k_crit_formula(0.3, 0.3, EPS)) == pytest.approx(math.sqrt(0.2) / (EPS * math.pi))
    assert float(k_crit_formula(0.3, 0.3, EPS)) == pytest.approx(28.47, abs=0.01)


def test_k_crit_undefined_outside_region():
    assert math.isnan(float(k_crit_formula(0.85, 0.1, EPS)))


def test_scan_k_max_covers_twice_the_bound():
    assert scan_k_max(EPS) >= 2 / (EPS * math.pi)
    assert scan_k_max(EPS, 200.0) >= 400
    assert scan_k_max(10.0) == 16


@pytest.mark.parametrize("method", list(RegionMethod))
def test_membership_examples(method):
    inside = region_D_membership(0.3, 0.3, method, epsilon=EPS)
    outside = region_D_membership(0.85, 0.1, method, epsilon=EPS)
    assert inside.in_region_D is True
    assert outside.in_region_D is False
    assert inside.hyperbolic_1d is False and outside.hyperbolic_1d is True


def test_scan_report_details():
    report = region_D_membership(0.3, 0.3, RegionMethod.SCAN, epsilon=EPS)
    assert report.k_crit == pytest.approx(28.47, abs=0.01)
    assert report.k_crit_scan is not None
    assert report.max_growth > 0
    assert report.bracketed
    assert 1 <= report.argmax_k <= report.k_crit_scan


def test_curve_without_epsilon_has_no_growth_data():
    report = region_D_membership(0.3, 0.3, RegionMethod.CURVE)
    assert report.in_region_D is True
    assert report.max_growth is None and report.k_crit is None


def test_scan_requires_epsilon():
    with pytest.raises(ParameterError, match="epsilon"):
        region_D_membership(0.3, 0.3, RegionMethod.SCAN)


def test_membership_rejects_points_outside_simplex():
    with pytest.raises(ParameterError, match="simplex"):
        region_D_membership(0.8, 0.5, RegionMethod.CURVE)


def test_curve_membership_uses_strict_bounds():
    assert in_region_D_curve(0.3, 0.3) is True
    assert in_region_D_curve(0.85, 0.1) is False
    assert in_region_D_curve(0.0, 0.0) is False


# ---------------------------------------------------------------------------
# 4. Rasters
# ---------------------------------------------------------------------------


def test_simplex_samples_count():
    r, b = simplex_samples(32)
    assert r.size == 32 * 33 // 2
    assert np.all(r + b <= 1.0 + 1e-12)


def test_raster_region_map_layout():
    frame = raster_region_map(32, 0.05)
    assert isinstance(frame, pd.DataFrame)
    assert list(frame.columns) == list(RASTER_COLUMNS)
    assert len(frame) == 528
    vacuum = frame[(frame.r == 0.0) & (frame.b == 0.0)].iloc[0]
    assert not vacuum.in_D and vacuum.hyperbolic
    assert frame.sort_values(["r", "b"]).index.tolist() == frame.index.tolist()


def test_raster_methods_mostly_agree():
    scan = raster_region_map(32, EPS, RegionMethod.SCAN)
    curve = raster_region_map(32, EPS, RegionMethod.CURVE)
    agreement = float((scan.in_D == curve.in_D).mean())
    assert agreement > 0.9


@pytest.mark.parametrize("method", list(RegionMethod))
def test_elliptic_points_lie_in_region_d(method):
    frame = raster_region_map(128, EPS, method)
    elliptic = frame[~frame.hyperbolic]
    assert len(elliptic) > 4000
    assert elliptic.in_D.all()


@pytest.mark.parametrize(("resolution", "epsilon"), [(31, 0.05), (32, 0.0)])
def test_raster_rejects_bad_arguments(resolution, epsilon):
    with pytest.raises(ParameterError):
        raster_region_map(resolution, epsilon)


def test_elliptic_set_is_one_region():
    mask = elliptic_mask(65)
    assert mask.any()
    assert count_connected_regions(mask) == 1


def test_count_connected_regions():
    mask = np.zeros((6, 6), dtype=bool)
    mask[0, 0] = mask[0, 1] = True
    mask[3:5, 3:5] = True
    mask[5, 0] = True
    assert count_connected_regions(mask) == 3
