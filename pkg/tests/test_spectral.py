"""Spectral densities, Fourier inversion, density-level criterion."""

import math

import numpy as np
import pytest

from rectfield.lamperti import c_fbs_stationary
from rectfield.quadrature import QuadratureError, integrate_1d
from rectfield.spectral import (
    SpectralDensity,
    cov_from_density,
    density_criterion_residual,
    fbm_density,
    fbm_spectral_cov_check,
    g_fbm,
    g_product,
    g_w,
    product_density,
)

# reference value from a 50-digit evaluation of the closed formula
G_FBM_03_AT_1 = 0.10388798748998728943


def test_density_reduces_to_cauchy_at_half():
    for x in np.arange(-10.0, 10.0 + 1e-9, 0.01):
        rel = abs(g_fbm(0.5, x) - g_w(x)) / g_w(x)
        assert rel <= 1e-10


def test_density_even():
    for H in (0.2, 0.5, 0.8):
        for x in (0.3, 1.7, 12.0, 150.0):
            assert g_fbm(H, x) == g_fbm(H, -x)


def test_density_reference_point():
    assert g_fbm(0.3, 1.0) == pytest.approx(G_FBM_03_AT_1, rel=1e-12)


def test_density_against_cosine_transform_oracle():
    # independent route: g(x) = (1/pi) int_0^inf cos(x v) C(v) dv
    for H, x in ((0.3, 1.0), (0.7, 0.4), (0.2, 2.5)):
        res = integrate_1d(lambda v: c_fbs_stationary((H,), (v,)),
                           0.0, np.inf, tol=1e-9, oscillation=("cos", x))
        oracle = res.value / math.pi
        assert g_fbm(H, x) == pytest.approx(oracle, abs=1e-8)


def test_density_far_tail_is_finite_and_powerlike():
    # naive evaluation overflows past x ~ 200; the tail must follow
    # c_H |x|^{-1-2H}
    for H in (0.1, 0.5, 0.9):
        v1, v2 = g_fbm(H, 500.0), g_fbm(H, 1000.0)
        assert 0.0 < v2 < v1
        ratio = v2 / v1
        assert ratio == pytest.approx(2.0 ** -(1 + 2 * H), rel=1e-3)


def test_mass_is_one():
    for H in (0.1, 0.3, 0.5, 0.7, 0.9):
        res = cov_from_density(fbm_density(H), (0.0,))
        assert res.value == pytest.approx(1.0, abs=1e-6)
        assert res.imag_residual == 0.0


def test_transform_of_cauchy_density():
    dens = SpectralDensity(1, lambda x: g_w(np.atleast_1d(x)[0]))
    for v in (-2.0, 0.5, 3.0):
        res = cov_from_density(dens, (v,))
        assert res.value == pytest.approx(math.exp(-abs(v) / 2), abs=1e-8)
        assert res.imag_residual <= 1e-7


def test_transform_reconstructs_stationary_covariance():
    for H in (0.1, 0.3, 0.7, 0.9):
        dens = fbm_density(H)
        for v in (-3.0, -1.2, 0.4, 2.0, 3.0):
            res = cov_from_density(dens, (v,))
            want = c_fbs_stationary((H,), (v,))
            assert abs(res.value - want) <= 1e-4
            assert abs(res.value - want) <= 10 * max(res.err_estimate, 1e-10)


def test_transform_2d_product():
    H = (0.3, 0.7)
    dens = product_density(H)
    for v in ((0.0, 0.0), (1.0, -2.0), (-2.5, 0.6)):
        res = cov_from_density(dens, v)
        want = c_fbs_stationary(H, v)
        assert abs(res.value - want) <= 1e-4


def test_transform_2d_nonproduct_path():
    H = (0.4, 0.6)
    dens = SpectralDensity(2, lambda x: g_product(H, x))
    res = cov_from_density(dens, (0.8, -0.5), tol=1e-5)
    want = c_fbs_stationary(H, (0.8, -0.5))
    assert abs(res.value - want) <= 1e-4
    assert res.imag_residual <= 1e-4


def test_transform_dimension_checks():
    with pytest.raises(ValueError):
        cov_from_density(fbm_density(0.3), (1.0, 2.0))
    dens3 = SpectralDensity(3, lambda x: 0.0)
    with pytest.raises(QuadratureError):
        cov_from_density(dens3, (0.0, 0.0, 0.0))


def test_density_criterion_even_density_vanishes():
    H = (0.3, 0.7)
    dens = product_density(H)
    for x in ((0.5, 0.4), (-1.0, 2.0), (3.0, -0.2)):
        assert density_criterion_residual(dens, H, x) == pytest.approx(
            0.0, abs=1e-14)


def test_density_criterion_odd_perturbation_vanishes():
    # f = g (1 + delta odd(x1) odd(x2)) satisfies the membership identity
    H = (0.3, 0.7)

    def f(x):
        x = np.atleast_1d(x)
        return g_product(H, x) * (1 + 0.5 * math.tanh(x[0]) * math.tanh(x[1]))

    dens = SpectralDensity(2, f)
    for x in ((0.5, 0.4), (-1.0, 2.0), (1.5, -0.7)):
        assert density_criterion_residual(dens, H, x) == pytest.approx(
            0.0, abs=1e-14)
        assert f(x) >= 0.0


def test_density_criterion_detects_scaling():
    H = (0.3, 0.7)
    dens = SpectralDensity(2, lambda x: 1.1 * g_product(H, x))
    x = (0.5, 0.4)
    want = 0.1 * 4 * g_product(H, x)
    assert density_criterion_residual(dens, H, x) == pytest.approx(
        want, rel=1e-12)


def test_fbm_spectral_cov_check_examples():
    sp, cl = fbm_spectral_cov_check(0.4, 1.3, 1.3)
    assert cl == pytest.approx(1.3 ** 0.8, rel=1e-13)
    assert sp == pytest.approx(cl, abs=1e-5)

    sp, cl = fbm_spectral_cov_check(0.5, 1.0, math.e)
    assert cl == pytest.approx(1.0, rel=1e-13)
    assert sp == pytest.approx(1.0, abs=1e-6)

    sp, cl = fbm_spectral_cov_check(0.7, 1.0, 2.0)
    assert abs(sp - cl) <= 1e-4


def test_fbm_spectral_cov_check_domain():
    with pytest.raises(ValueError):
        fbm_spectral_cov_check(0.7, 0.0, 1.0)


def test_fbm_spectral_cov_check_random_sweep():
    rng = np.random.default_rng(31)
    for _ in range(50):
        H = rng.uniform(0.05, 0.95)
        s, t = rng.uniform(0.5, 4.0, 2)
        sp, cl = fbm_spectral_cov_check(H, s, t)
        assert abs(sp - cl) <= 1e-4, (H, s, t)
