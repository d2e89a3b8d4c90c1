import numpy as np
import pytest

from thermal_ising.errors import NonDecayedProfile, StepSizeError
from thermal_ising.linear_problem import (FieldProfile, check_lambda_asymptotics, connection_Ax,
                                          integrate_jost_plus, integrate_linear_problem, wronskian)


def bump(amp=0.4):
    return FieldProfile(lambda x: amp / np.cosh(x) ** 2, lambda x: 0.1 * np.tanh(x) / np.cosh(x) ** 2)


def test_connection_trace_and_free_form(params):
    rng = np.random.default_rng(1)
    prof = bump()
    for x, th in rng.normal(size=(5, 2)):
        A = connection_Ax(x, th, prof, params)
        assert abs(np.trace(A)) < 1e-15
    A = connection_Ax(0.3, 0.8, FieldProfile.zero(), params)
    p = np.sinh(0.8)
    assert np.allclose(A, 0.5j * p * np.array([[0, 1], [1, 0]]), atol=1e-15)


def test_connection_sigma_z_symmetry(params):
    sz = np.diag([1.0, -1.0])
    prof = bump()
    xs = np.linspace(-3, 3, 13)
    A = connection_Ax(xs, 0.5, prof, params)
    B = connection_Ax(xs, 0.5 + 1j * np.pi, prof, params)
    assert np.max(np.abs(B - sz @ A @ sz)) < 1e-14


def test_free_field_is_plane_wave(params):
    run = integrate_jost_plus(np.arcsinh(1.0), FieldProfile.zero(), params, step=1e-3)
    assert abs(run.a_num - 1) < 1e-10 and abs(run.b_num) < 1e-10
    wave = np.exp(0.5j * run.x)[:, None] * np.ones(2)
    assert np.max(np.abs(run.psi - wave)) < 1e-10


def test_wronskian_constant(params):
    prof = bump()
    th = 0.6
    r1 = integrate_linear_problem(th, prof, params, [1.0, 0.0], step=2e-3)
    r2 = integrate_linear_problem(th, prof, params, [0.0, 1.0], step=2e-3)
    w = wronskian(r1, r2)
    assert np.max(np.abs(w - w[0])) < 1e-6 * abs(w[0])


def test_step_halving_changes_little(params):
    prof = bump()
    a1 = integrate_jost_plus(0.9, prof, params, step=2e-3).a_num
    a2 = integrate_jost_plus(0.9, prof, params, step=1e-3).a_num
    assert abs(a1 - a2) < 1e-6


def test_errors(params):
    with pytest.raises(NonDecayedProfile):
        integrate_jost_plus(0.5, FieldProfile(lambda x: 0.1 + 0 * x), params)
    with pytest.raises(StepSizeError):
        integrate_jost_plus(5.0, bump(), params, step=0.1)


def test_lambda_asymptotics(params):
    zero = check_lambda_asymptotics(FieldProfile.zero(), params)
    # only RK4 phase error remains for the free field
    assert np.max(zero.deviations) < 1e-6
    rep = check_lambda_asymptotics(FieldProfile(lambda x: 0.4 / np.cosh(x) ** 2), params)
    assert rep.monotone
    assert rep.ratio == pytest.approx(2.0, rel=0.3)
