import math

import numpy as np
import pytest
from scipy.integrate import quad

from thermal_ising.errors import DomainError, PoleError
from thermal_ising.specfn import (GLAISHER_A, QuadratureConfig, SpectralPoint, ThermalParams,
                                  bessel_k, c_mu_coefficients, delta_vacuum_energy, g_pm, h_pm,
                                  h_pm_contour, log_kernel_moment, quantized_rapidity, s_T,
                                  thermal_log_kernel)
from thermal_ising.scattering import alpha


def test_params_validation():
    with pytest.raises(DomainError):
        ThermalParams(0.0, 1.0)
    with pytest.raises(DomainError):
        ThermalParams(1.0, -1.0)
    assert ThermalParams(2.0, 4.0).ratio == 0.5


def test_spectral_point_mass_shell():
    sp = SpectralPoint(0.3 + 0.2j, m=1.7)
    assert abs(sp.energy ** 2 - sp.momentum ** 2 - 1.7 ** 2) < 1e-12


def test_bessel_k_values_and_quadrature_oracle():
    assert bessel_k(0, 1.0) == pytest.approx(0.42102443824070834, rel=1e-14)
    assert bessel_k(1, 1.0) == pytest.approx(0.6019072301972346, rel=1e-14)
    k0 = quad(lambda t: np.exp(-2.3 * np.cosh(t)), 0, 20)[0]
    assert abs(bessel_k(0, 2.3) - k0) < 1e-12


def test_bessel_k_large_argument_and_recurrence():
    for nu in (0, 1, 2):
        x = 400.0
        lead = np.sqrt(np.pi / (2 * x)) * np.exp(-x)
        assert abs(bessel_k(nu, x) / lead - 1) < 2e-2
    for z in (0.7, 3.0 + 1.0j, 5j):
        for nu in (1, 2, 3):
            lhs = bessel_k(nu + 1, z)
            rhs = bessel_k(nu - 1, z) + 2 * nu / z * bessel_k(nu, z)
            assert abs(lhs - rhs) < 1e-10 * abs(lhs)


def test_bessel_k_errors():
    with pytest.raises(DomainError):
        bessel_k(0, 0.0)
    with pytest.raises(DomainError):
        bessel_k(13, 1.0)


def test_log_kernel(params):
    assert thermal_log_kernel(0.0, params) == pytest.approx(np.log((1 + np.exp(-1)) / (1 - np.exp(-1))))
    th = np.linspace(-4, 4, 17)
    L = thermal_log_kernel(th, params)
    assert np.all(L > 0)
    assert np.allclose(L, L[::-1], rtol=0, atol=1e-15)
    big = thermal_log_kernel(5.0, params)
    assert big / (2 * np.exp(-np.cosh(5.0))) == pytest.approx(1.0, rel=1e-6)


def test_g_pm(params):
    assert g_pm(1, 0.0, params) == pytest.approx(1.5819767068693265, rel=1e-12)
    th = np.linspace(-5, 5, 100)
    assert np.max(np.abs(g_pm(1, th, params) + g_pm(-1, th, params) - 1)) < 1e-12
    assert abs(g_pm(-1, 6.0, params)) < 1e-80
    assert g_pm(1, 0.0, params, "NS") == pytest.approx(1 / (1 + np.exp(-1)))
    th1 = quantized_rapidity(1, params)
    with pytest.raises(PoleError):
        g_pm(1, th1 + 0.5j * np.pi, params)


def test_quantized_rapidity(params):
    assert quantized_rapidity(0, params) == 0
    assert quantized_rapidity(1, params) == pytest.approx(np.log(2 * np.pi + np.sqrt(1 + 4 * np.pi ** 2)))
    n = np.arange(1, 6)
    assert np.allclose(quantized_rapidity(-n, params), -quantized_rapidity(n, params))
    assert np.all(np.diff(quantized_rapidity(np.arange(-5, 6), params)) > 0)


def test_h_pm_limits_and_identities(params):
    big = h_pm(1, 30.0, params)
    assert abs(big - np.exp(0.25j * np.pi) / np.sqrt(2 * np.pi)) < 1e-10
    th = np.array([0.0, 0.5, 1.3])
    prod = h_pm(1, th, params) * h_pm(-1, th, params) * alpha(th, params)
    assert np.max(np.abs(prod - 1 / (2 * np.pi))) < 1e-8
    assert np.max(np.abs(np.conj(h_pm(1, th, params)) - h_pm(-1, th, params))) < 1e-10


def test_h_pm_principal_value_vs_shifted_contour(params):
    th = np.array([-0.8, 0.2, 1.1])
    for off in (0.2, 0.6):
        for s in (1, -1):
            assert np.max(np.abs(h_pm(s, th, params) - h_pm_contour(s, th, params, off))) < 1e-10


def test_h_plus_strip_shift(params):
    assert abs(h_pm(1, 0.7 + 1j * np.pi, params) - 1j * h_pm(-1, 0.7, params)) < 1e-8


def test_delta_vacuum_energy(params):
    val = delta_vacuum_energy(params)
    assert val == pytest.approx(2.4646925414949514, rel=1e-10)
    assert delta_vacuum_energy(ThermalParams(2.0, 1.0)) < val
    assert delta_vacuum_energy(ThermalParams(60.0, 1.0)) < 1e-20
    fine = delta_vacuum_energy(params, QuadratureConfig(abs_tol=1e-15, rel_tol=1e-14))
    assert abs(fine - val) < 1e-10


def test_s_T(params):
    assert s_T(params) == pytest.approx(1.3858542849254092, rel=1e-9)
    head = 2 ** (1 / 12) * np.exp(-1 / 8) * GLAISHER_A ** 1.5
    assert s_T(ThermalParams(1.0, 1 / 60)) == pytest.approx(head, rel=1e-10)
    for r in (0.5, 1.0, 2.0, 5.0):
        assert s_T(ThermalParams(r, 1.0)) > 0


def test_c_mu(params):
    c = c_mu_coefficients(6, params)
    assert c[0] == 1
    c1 = -2j / np.pi * log_kernel_moment(1.0, params)
    assert abs(c[1] - c1) < 1e-12
    assert abs(c[2] - 0.5 * c1 ** 2) < 1e-12
    assert np.max(np.abs(c[1::2].real)) < 1e-14 and np.max(np.abs(c[2::2].imag)) < 1e-14


def test_c_mu_regenerates_exponential(params):
    # truncated exp of the exponent polynomial, summed as a power series
    P = np.polynomial.polynomial
    deg = 8
    expo = np.zeros(deg + 1, dtype=complex)
    for k in (1, 3, 5, 7):
        expo[k] = -2j / np.pi * log_kernel_moment(float(k), params)
    total = np.zeros(deg + 1, dtype=complex)
    power = np.array([1.0 + 0j])
    for n in range(deg + 1):
        total[:power.size] += power / math.factorial(n)
        power = P.polymul(power, expo)[:deg + 1]
    c = c_mu_coefficients(deg, params)
    for q in (0.1, 0.2):
        assert abs(P.polyval(q, c) - P.polyval(q, total)) < 1e-10 * abs(P.polyval(q, total))
