import warnings

import numpy as np
import pytest

from thermal_ising.asymptotics import (LightconeCoords, ansatz_matrix, chi_equation_residual,
                                       correlators_lightcone, delta_weights, g_bracket_terms,
                                       g_oracle, klein_gordon_check, phi_from_kernel, phi_lightcone,
                                       series_coefficients, verify_ansatz_system,
                                       xi_solution_check, xi_two_scale)
from thermal_ising.errors import BranchError, DomainError, RegimeWarning
from thermal_ising.glm import kernel_bessel_series
from thermal_ising.specfn import ThermalParams, bessel_k, s_T


def test_coords():
    c = LightconeCoords.from_xt(4.0, 6.0)
    assert (c.v, c.w, c.regime) == (2.0, 10.0, "time-like")
    assert LightconeCoords.from_xt(6.0, 4.0).regime == "space-like"
    with pytest.raises(BranchError):
        LightconeCoords.from_xt(3.0, 3.0)
    with pytest.raises(DomainError):
        LightconeCoords(1.0, -1.0)


def test_regime_warning(params):
    with pytest.warns(RegimeWarning):
        phi_lightcone(LightconeCoords(2.0, 5.0), params)


def test_phi_equals_minus_two_i_f_minus_one(params):
    c = LightconeCoords.from_xt(4.0, 6.0)
    with warnings.catch_warnings():
        warnings.simplefilter("ignore", RegimeWarning)
        for mu in (0, 2, 4):
            a = phi_lightcone(c, params, mu)
            b = -2j * kernel_bessel_series(-1, 8.0, 6.0, params, mu_max=mu, truncation="fixed")
            assert abs(a - b) < 1e-14
            assert abs(a - phi_from_kernel(c, params, mu)) < 1e-14
        assert abs(phi_lightcone(c, params, truncation="optimal")
                   - phi_from_kernel(c, params, truncation="optimal")) < 1e-14


def test_zero_temperature_limit():
    cold = ThermalParams(1.0, 0.02)
    c = LightconeCoords(1.5, 300.0)
    val = phi_lightcone(c, cold, 3)
    head = 2 / np.pi * bessel_k(0, 1j * np.sqrt(1.5 * 300.0))
    assert abs(val - head) < 1e-12 * abs(head)


def test_space_like_path_continuity(params):
    # rotate v through the lower half plane and compare with the space-like branch
    w = 40.0
    c = series_coefficients(params).c

    def phi_complex(v):
        r = np.sqrt(v) * np.sqrt(w)
        return sum(2 / np.pi * c[k] * (np.sqrt(v) / np.sqrt(w)) ** k * bessel_k(k, 1j * r) for k in range(4))

    vals = [phi_complex(2.0 * np.exp(-1j * a)) for a in np.linspace(0, np.pi, 401)]
    assert np.max(np.abs(np.diff(vals))) < 0.05 * np.max(np.abs(vals))
    ref = phi_lightcone(LightconeCoords(-2.0, w), params, 3)
    assert abs(vals[-1] - ref) < 1e-12 * abs(ref) + 1e-15


def test_printed_constants():
    zero = series_coefficients(None)
    assert [zero.g_value(k, 0.0) for k in (1, 2, 3)] == [1j / 8, -9 / 128, -75j / 1024]
    assert [zero.f_value(k, 0.0) for k in (1, 2, 3)] == [3j / 4, -33 / 32, -255j / 128]
    for k in (1, 2, 3):
        assert np.allclose(zero.g[k - 1][1:], 0) and np.allclose(zero.f[k - 1][1:], 0)


def test_g_from_bessel_asymptotics(params):
    co = series_coefficients(params)
    assert co.g_value(1, 0.7) == pytest.approx(1j / 8 + co.c[1] * 0.7)
    for k in (1, 2, 3):
        for mv in (0.3, 1.2):
            assert abs(g_oracle(k, co.c, mv) - co.g_value(k, mv)) < 1e-13


def test_phi_series_matches_bessel_sum(params):
    from thermal_ising.asymptotics import phi_series
    co = series_coefficients(params)
    err = []
    for w in (200.0, 800.0):
        exact = phi_lightcone(LightconeCoords(0.8, w), params, 3)
        err.append(abs(exact - phi_series(0.8, w, params.m, co, 3)) / abs(exact))
    # first omitted order is (vw)^-2
    assert err[0] < 1e-2
    assert err[0] / err[1] == pytest.approx(16.0, rel=0.3)


def test_chi_equation_order_by_order(params):
    for order in (1, 2, 3):
        r = [chi_equation_residual(0.5, w, params, order) for w in (100.0, 400.0)]
        slope = np.log2(r[0] / r[1]) / 2
        assert slope == pytest.approx((order + 1) / 2, abs=0.15)


def test_klein_gordon(params):
    for mu in range(4):
        for v, w in ((1.0, 20.0), (2.0, 40.0), (0.5, 60.0)):
            assert klein_gordon_check(mu, v, w) < 1e-5


def test_bracket(params):
    c = LightconeCoords(1.0, 30.0)
    zero = np.array([1.0, 0, 0, 0])
    assert g_bracket_terms(c, 1.0, zero)[0] == -1 / (8 * np.pi * 30.0)
    t1 = g_bracket_terms(c, 1.0, series_coefficients(params).c)[0]
    assert t1 == -1 / (8 * np.pi * 30.0)


def test_correlators(params):
    c = LightconeCoords.from_xt(30.0, 32.0)
    G, Gt = correlators_lightcone(c, params)
    assert np.isfinite(G) and np.isfinite(Gt)
    assert abs(G / s_T(params) ** 2 - 1) < 0.01
    assert abs(Gt - 0.5 * s_T(params) ** 2 * phi_lightcone(c, params)) < 1e-15
    F = kernel_bessel_series(-1, 60.0, 32.0, params, mu_max=3, truncation="fixed")
    assert abs(Gt - (-1j) * s_T(params) ** 2 * F) < 1e-14
    G2, _ = correlators_lightcone(c, params, abc=(0.1, 0.01, 0.0))
    assert abs(G2 / G - np.exp(-0.1 - 0.3)) < 1e-14


def test_ansatz_system(params):
    rng = np.random.default_rng(7)
    draws = [(-1j, -1j)] + [tuple(rng.normal(size=2) + 1j * rng.normal(size=2)) for _ in range(20)]
    for K, Kt in draws:
        rep = verify_ansatz_system(K, Kt)
        assert rep.passed
    r2 = verify_ansatz_system(0.3 + 0.1j, -2j, m=2.5)
    assert np.allclose(r2.solution[1], 2.5 * verify_ansatz_system(0.3 + 0.1j, -2j).solution[1])
    assert ansatz_matrix(0.1, 0.2, 1).shape == (8, 8)


def test_delta_bookkeeping(params):
    d = delta_weights(params)
    assert abs(d["r_head"] - 2j) < 1e-7
    assert abs(d["F0"] - 2j / params.m) < 1e-7
    assert np.allclose(d["U1"], [-1j, 1j], atol=1e-7)


def test_xi_residual_decays_faster(params):
    a, b, ok = xi_two_scale(params, (1.0, 1.5), 10.0)
    assert ok
    assert abs(a.residual) < a.retained
    with pytest.raises(DomainError):
        xi_solution_check(params, (5.0, 6.0, 4.0))
