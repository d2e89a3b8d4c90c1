import numpy as np
import pytest

from thermal_ising.errors import PoleError
from thermal_ising.scattering import (ScatteringData, alpha, beta, jost_a, jost_b, jost_c, jost_d,
                                      reflection_r)
from thermal_ising.specfn import quantized_rapidity


def test_alpha_beta_closed_forms(params):
    assert alpha(0.0, params) == pytest.approx(1 / np.tanh(0.5))
    assert beta(0.0, params) == pytest.approx(2 / (1 - np.exp(-1)))
    th = np.linspace(-3, 3, 31)
    assert np.max(np.abs(beta(th, params) - alpha(th, params) - 1)) < 1e-14
    assert abs(1 - beta(0.4, params) - alpha(0.4 + 1j * np.pi, params)) < 1e-14


def test_alpha_riemann_hilbert_bullets(params):
    th = np.linspace(-4, 4, 41)
    assert np.max(np.abs(np.imag(alpha(th.astype(complex), params)))) < 1e-15
    assert abs(alpha(0.3 + 1j * np.pi, params) + alpha(0.3, params)) < 1e-14
    assert abs(alpha(8.0, params) - 1) < 1e-100 + 1e-12
    with pytest.raises(PoleError):
        alpha(quantized_rapidity(2, params) + 0.5j * np.pi, params)


def test_jost_limits(params):
    assert abs(jost_a(30.0, params) - 1) < 1e-10
    assert abs(jost_a(-30.0, params) - 1) < 1e-10
    assert jost_b(0.0, 0.0, params) == pytest.approx(2j / (1 - np.e))


def test_wronskian_triple(params):
    th = np.linspace(-3, 3, 50)
    a, b, c, d = jost_a(th, params), jost_b(th, 0.0, params), jost_c(th, params), jost_d(th, params)
    assert np.max(np.abs(d + a)) < 1e-8
    assert np.max(np.abs(np.abs(a) ** 2 + b * np.conj(c) - 1)) < 1e-8
    assert np.max(np.abs(np.conj(b) + b)) < 1e-15


def test_b_time_evolution_is_a_phase(params):
    for t in (0.5, 2.0):
        assert abs(abs(jost_b(0.7, t, params)) - abs(jost_b(0.7, 0.0, params))) < 1e-15


def test_a_zero_free_in_strip(params):
    re = np.linspace(-3, 3, 40)
    im = np.linspace(0.05, np.pi - 0.05, 40)
    Z = (re[:, None] + 1j * im[None, :]).ravel()
    n1 = quantized_rapidity(np.arange(-3, 4), params)
    keep = np.min(np.abs(Z[:, None] - (n1 + 0.5j * np.pi)[None, :]), axis=1) > 0.05
    assert np.min(np.abs(jost_a(Z[keep], params))) > 1e-3


def test_reflection(params):
    assert abs(reflection_r(25.0, 0.0, params) - 2j) < 1e-8
    assert abs(reflection_r(25.0, 0.0, params, "negative")) < 1e-8
    th = 0.6
    lhs = reflection_r(th, 0.0, params) * jost_a(th, params)
    assert abs(lhs - jost_b(th + 1j * np.pi, 0.0, params)) < 1e-10


def test_scattering_data_container(params):
    sd = ScatteringData(params, t=0.5)
    assert abs(sd.a(0.3) - jost_a(0.3, params)) < 1e-15
    assert abs(sd.b(0.3) - jost_b(0.3, 0.5, params)) < 1e-15
