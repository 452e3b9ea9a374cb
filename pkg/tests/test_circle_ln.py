import math

import numpy as np
import pytest
from scipy.integrate import quad

from flowdepth import circle_ln as cl
from flowdepth.errors import DomainError, NonInvertible, ZeroDivisor

BETAS = (math.pi / 3, cl.DEFAULT_BETA, 2.5)
IDENT = cl.CircleDiffeo()


def test_kernel_coefficient_examples():
    assert cl.gb_coeff(1, math.pi / 2) == pytest.approx(0.25, abs=1e-15)
    assert cl.gb_coeff(1, math.pi / 3) == pytest.approx(
        (math.pi / 3 - math.sin(2 * math.pi / 3) / 2) / (2 * math.pi), abs=1e-15)
    assert cl.gb_coeff(1, math.pi / 3) == pytest.approx(0.09775, abs=1e-5)
    assert cl.gb_coeff(2, math.pi / 3) == pytest.approx(0.06892, abs=1e-5)
    for beta in BETAS:
        assert cl.gb_coeff(0, beta) == pytest.approx(
            (math.sin(beta) - beta * math.cos(beta)) / math.pi, abs=1e-15)


@pytest.mark.parametrize("beta", BETAS)
def test_kernel_coefficients_against_trapezoid(beta):
    n = 2**16
    x = 2 * math.pi * np.arange(n) / n
    g = cl.gb_samples(beta, x)
    for k in range(65):
        assert cl.gb_coeff(k, beta) == pytest.approx(float(np.mean(g * np.cos(k * x))), abs=1e-8)


@pytest.mark.parametrize("beta", BETAS)
def test_kernel_coefficients_against_adaptive_quadrature(beta):
    for k in (1, 2, 5, 17):
        ref, _ = quad(lambda x: max(math.cos(x) - math.cos(beta), 0.0) * math.cos(k * x),
                      -beta, beta, limit=200)
        assert cl.gb_coeff(k, beta) == pytest.approx(ref / (2 * math.pi), abs=1e-12)


@pytest.mark.parametrize("beta", BETAS)
def test_kernel_coefficients_decay_quadratically(beta):
    # |a_n| <= (1/2pi)(1/(n(n-1)) + 1/(n(n+1))) = 1/(pi (n^2 - 1)) for n >= 2
    scaled = [abs(cl.gb_coeff(k, beta)) * k * k for k in range(1, 513)]
    assert max(scaled) <= 2.0 / math.pi


def test_periodic_grid_validation():
    with pytest.raises(DomainError):
        cl.PeriodicGrid(np.zeros(24))
    with pytest.raises(DomainError):
        cl.PeriodicGrid(np.zeros(8))


def test_coefficients_match_numpy():
    rng = np.random.default_rng(0)
    v = rng.normal(size=64)
    np.testing.assert_allclose(cl.PeriodicGrid(v).coefficients(), np.fft.fft(v) / 64, atol=1e-14)


def test_deconvolve_band_limited_kernel_gives_unit_modes():
    n, M = 256, 32
    k = cl._fft.frequencies(n)
    coeffs = np.array([cl.gb_coeff(int(m), cl.DEFAULT_BETA) if abs(m) <= M else 0.0 for m in k])
    f = cl.PeriodicGrid(np.real(np.fft.ifft(coeffs) * n))
    d = cl.deconvolve(f, M=M)
    rc = d.rho.coefficients()
    np.testing.assert_allclose(rc[np.abs(k) <= M], 1.0, atol=1e-12)
    assert d.reconstruction_error < 1e-8


def test_deconvolve_sampled_kernel():
    n = 2**14
    f = cl.PeriodicGrid.sample(lambda x: cl.gb_samples(cl.DEFAULT_BETA, x), n)
    d = cl.deconvolve(f, M=16)
    k = cl._fft.frequencies(n)
    np.testing.assert_allclose(d.rho.coefficients()[np.abs(k) <= 16], 1.0, atol=1e-5)
    assert d.reconstruction_error < 1e-8


def test_single_mode_division():
    a1 = cl.gb_coeff(1, cl.DEFAULT_BETA)
    f = cl.PeriodicGrid.sample(lambda x: a1 * np.cos(x), 64)
    d = cl.deconvolve(f)
    np.testing.assert_allclose(d.rho.values, np.cos(d.rho.nodes), atol=1e-13)
    assert d.l2_bound == pytest.approx(math.sqrt(math.pi), abs=1e-13)
    assert d.l1_bound == pytest.approx(math.sqrt(2 * math.pi) * d.l2_bound, abs=1e-14)


def test_constant_division():
    f = cl.PeriodicGrid(np.full(32, 3.0))
    d = cl.deconvolve(f, cl.DEFAULT_BETA)
    np.testing.assert_allclose(d.rho.values, 3.0 / cl.gb_coeff(0, cl.DEFAULT_BETA), rtol=1e-13)


def test_deconvolution_against_direct_convolution():
    """g_b * rho by trapezoid quadrature, independent of any transform."""
    rng = np.random.default_rng(1)
    k = np.arange(1, 9)
    a, b = rng.normal(size=(2, k.size)) / k**2

    def fn(x):
        x = np.atleast_1d(x)
        return 0.3 + np.cos(np.outer(x, k)) @ a + np.sin(np.outer(x, k)) @ b

    f = cl.PeriodicGrid.sample(fn, 64)
    d = cl.deconvolve(f, cl.DEFAULT_BETA, M=12)
    rc = d.rho.coefficients()
    modes = cl._fft.frequencies(64)

    def rho(y):
        return np.real(np.exp(1j * np.outer(y, modes)) @ rc)

    y = 2 * math.pi * np.arange(2**14) / 2**14
    ry = rho(y)
    for x in np.linspace(0.0, 2 * math.pi, 7, endpoint=False):
        conv = float(np.mean(cl.gb_samples(cl.DEFAULT_BETA, x - y) * ry))
        assert conv == pytest.approx(float(fn(x)[0]), abs=1e-6)


def test_rational_angle_hits_zero_divisor():
    f = cl.PeriodicGrid.sample(np.cos, 64)
    with pytest.raises(ZeroDivisor):
        cl.deconvolve(f, math.pi / 2, M=8)
    with pytest.raises(DomainError):
        cl.deconvolve(f, 4.0)


def test_circle_diffeomorphisms():
    psi = cl.CircleDiffeo(0.1, 3, 0.4)
    x = np.linspace(0, 2 * math.pi, 101)
    assert abs(psi(2 * math.pi) - psi(0.0) - 2 * math.pi) < 1e-10
    assert np.all(psi.d(1, x) > 0)
    np.testing.assert_allclose(psi(psi.inverse(x)), x, atol=1e-11)
    with pytest.raises(NonInvertible):
        cl.CircleDiffeo(0.5, 2)
    assert cl.circle_map("warp(0.05,1)") == cl.CircleDiffeo(0.05, 1)
    assert cl.circle_map("identity") == IDENT
    with pytest.raises(DomainError):
        cl.circle_map("spin(1)")


def test_local_bound_examples():
    zero = cl.PeriodicGrid(np.zeros(256))
    assert cl.local_bound(zero, IDENT) == 0.0
    u = cl.PeriodicGrid.sample(np.cos, 256)
    assert cl.local_bound(u, IDENT) == pytest.approx(math.sqrt(math.pi) + 1, abs=1e-12)
    warp = cl.CircleDiffeo(0.1, 1)
    coarse = cl.local_bound(u, warp)
    fine = cl.local_bound(cl.PeriodicGrid.sample(np.cos, 512), warp)
    assert fine == pytest.approx(coarse, abs=1e-3)


def test_rational_coefficients_at_one():
    assert float(cl.coeff_A(1.0)) == 1.0
    assert float(cl.coeff_B(1.0)) == -3.0
    assert float(cl.coeff_C(1.0)) == 3.0
    a, b, c = cl.path_coefficients(1.0)
    assert (float(a), float(b), float(c)) == (1.0, -3.0, 3.0)


@pytest.mark.parametrize("rho", [0.3, 0.8, 1.0, 1.7, 4.0])
def test_path_coefficients_against_quadrature(rho):
    h = lambda t: t + (1 - t) * rho
    a = quad(lambda t: h(t) ** -7, 0, 1, epsabs=1e-14)[0]
    b = quad(lambda t: -6 * (1 - t) * h(t) ** -8, 0, 1, epsabs=1e-14)[0]
    c = quad(lambda t: 9 * (1 - t) ** 2 * h(t) ** -9, 0, 1, epsabs=1e-14)[0]
    np.testing.assert_allclose(cl.path_coefficients(rho), (a, b, c), rtol=1e-10)
    assert float(cl.coeff_C(rho)) == pytest.approx(c, rel=1e-12)


def test_functional_vanishes_on_the_diagonal():
    for psi in (IDENT, cl.CircleDiffeo(0.2, 2, 0.3)):
        g = cl.global_bound_functional(psi, psi, 256)
        assert g.J == 0.0 and g.sup_term == 0.0 and g.J_path == 0.0


def test_functional_positive_and_self_convergent():
    warp = cl.CircleDiffeo(0.05, 1)
    a = cl.global_bound_functional(warp, IDENT, 1024)
    b = cl.global_bound_functional(warp, IDENT, 2048)
    assert a.J > 0
    assert b.J == pytest.approx(a.J, abs=1e-4)
    assert a.sup_term == pytest.approx(0.05, abs=1e-12)
    assert a.bound(2.0, 3.0) == pytest.approx(2 * a.J + 3 * a.sup_term)


def test_functional_rotation_invariance():
    p1, p2 = cl.CircleDiffeo(0.05, 1), cl.CircleDiffeo(0.1, 2, 0.2)
    ref = cl.global_bound_functional(p1, p2).J
    for s in (0.3, 1.0, 2.5):
        assert cl.global_bound_functional(p1.rotated(s), p2.rotated(s)).J == pytest.approx(ref, abs=2e-4)


def test_path_functional_equals_direct_energy():
    p1, p2 = cl.CircleDiffeo(0.1, 2, 0.2), cl.CircleDiffeo(0.05, 1)
    g = cl.global_bound_functional(p1, p2, 1024)
    assert cl.path_energy(p1, p2, 1024) == pytest.approx(g.J_path, rel=1e-10)


def test_checksum_is_partial_sum():
    assert cl.an_checksum(cl.DEFAULT_BETA, 3) == pytest.approx(
        sum(cl.gb_coeff(k, cl.DEFAULT_BETA) for k in (1, 2, 3)), abs=1e-16)
