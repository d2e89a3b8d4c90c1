import numpy as np
import pytest

from thermal_ising.errors import DomainError, TruncationError, ValidityError
from thermal_ising.form_factors import CircleModeSet, TruncationPolicy, phi_equal_time
from thermal_ising.glm import (KernelGrid, bessel_series_terms, bessel_truncation_estimate,
                               kernel_bessel_series, kernel_direct, kernel_residue_sum,
                               neumann_orders, phi_derivative_combination, reconstruct_phi,
                               reconstruct_phi_profile, volterra_solve, write_kernel_csv)
from thermal_ising.specfn import bessel_k, c_mu_coefficients


def test_residue_sum_sign_patterns(params):
    f = kernel_residue_sum(-1, 2.0, 0.0, params)
    assert abs(f.real) < 1e-16 and f.imag > 0
    f0 = kernel_residue_sum(0, 3.0, 0.0, params)
    assert f0.real < 0 and abs(f0.imag) < 1e-16
    assert f0.real == pytest.approx(-0.14498165159928061, rel=1e-10)


def test_f_minus_two_is_minus_f0(params):
    for x in (2.0, 3.0, 4.5):
        a = kernel_residue_sum(0, x, 0.0, params)
        b = kernel_residue_sum(-2, x, 0.0, params)
        assert abs(a + b) < 1e-14 * abs(a)


def test_residue_vs_direct(params):
    assert abs(kernel_residue_sum(-1, 3.0, 0.0, params) - kernel_direct(-1, 3.0, 0.0, params)) < 1e-8
    assert abs(kernel_residue_sum(0, 3.0, 0.0, params) - kernel_direct(0, 3.0, 0.0, params)) < 1e-8
    # t != 0 needs the exp(m t sinh) extension of the residues
    assert abs(kernel_residue_sum(0, 2.5, 1.0, params) - kernel_direct(0, 2.5, 1.0, params)) < 1e-6


def test_residue_validity(params):
    with pytest.raises(ValidityError):
        kernel_residue_sum(0, 2.0, 1.0, params)


def test_direct_window_convergence(params):
    a = kernel_direct(-2, 3.0, 0.5, params, window=14)
    b = kernel_direct(-2, 3.0, 0.5, params, window=7)
    assert abs(a - b) < 1e-10


def test_bessel_vs_direct_time_like(params):
    for j, (x, t) in [(-1, (6.0, 2.0)), (0, (2.5, 1.0))]:
        diff = abs(kernel_bessel_series(j, x, t, params) - kernel_direct(j, x, t, params))
        assert diff < bessel_truncation_estimate(j, x, t, params)


def test_bessel_pole_near_light_cone(params):
    t = 3.0
    for d in (1e-2, 1e-3):
        x = 2 * t - d
        head = bessel_series_terms(0, x, t, params, 0)[0]
        P, Q = 1j * (t - x / 2), 1j * (t + x / 2)
        ref = 1j / np.pi * np.sqrt(Q / P) * bessel_k(1, np.sqrt(P) * np.sqrt(Q))
        assert abs(head - ref) < 1e-12 * abs(ref)
    h1 = abs(bessel_series_terms(0, 2 * t - 1e-2, t, params, 0)[0])
    h2 = abs(bessel_series_terms(0, 2 * t - 1e-3, t, params, 0)[0])
    assert h2 / h1 == pytest.approx(10.0, rel=0.05)


def test_bessel_term_indices(params):
    c = c_mu_coefficients(3, params)
    x, t = 5.0, 2.0
    P, Q = 1j * (t - x / 2), 1j * (t + x / 2)
    z = np.sqrt(P) * np.sqrt(Q)
    for j in (0, -1, -2):
        terms = bessel_series_terms(j, x, t, params, 3)
        for mu in range(4):
            ref = 1j / np.pi * c[mu] * (np.sqrt(Q) / np.sqrt(P)) ** (1 + j - mu) * bessel_k(mu - 1 - j, z)
            assert abs(terms[mu] - ref) < 1e-14 * max(1, abs(ref))


def test_kernel_grid_and_csv(params, tmp_path):
    g = KernelGrid.build(0, 1.0, [1.5, 2.5], params, "residue_sum")
    assert list(g.valid) == [False, True]
    path = tmp_path / "k.csv"
    write_kernel_csv([g], path)
    lines = path.read_text().splitlines()
    assert lines[0] == "j,x,t,re,im,representation" and len(lines) == 3


def test_volterra_decay_and_neumann(params):
    sol = volterra_solve(3.0, 0.0, params)
    assert np.max(np.abs(sol.U1[-1])) < 1e-10 and np.max(np.abs(sol.W1[-1])) < 1e-10
    no = neumann_orders(3.0, params, order=3)
    U_sum = no.U_orders.sum(axis=0)
    assert np.max(np.abs(U_sum - sol.U1[0])) < 1e-6
    F0 = kernel_residue_sum(0, 6.0, 0.0, params)
    assert abs(no.U_orders[0, 0] + 0.5 * F0) < 1e-14
    assert abs(no.U_orders[0, 1] + no.U_orders[0, 0]) < 1e-15


def test_nystrom_vs_degenerate(params):
    a = volterra_solve(2.5, 0.0, params)
    b = volterra_solve(2.5, 0.0, params, method="degenerate")
    assert abs(reconstruct_phi(a, params) - reconstruct_phi(b, params)) < 1e-5


def test_reconstruct_matches_form_factors(params):
    modes = CircleModeSet(params, 20)
    pol = TruncationPolicy(20, 2, 3)
    for x in (2.0, 3.5):
        phi = reconstruct_phi(volterra_solve(x, 0.0, params), params)
        ref = phi_equal_time(x, params, pol, modes)
        assert abs(phi / ref - 1) < 1e-3


def test_derivative_combination(params):
    x, h = 3.0, 1e-3
    ph = reconstruct_phi_profile([x - h, x + h], 0.0, params, method="degenerate")
    dphi_dx = (ph[1] - ph[0]) / (2 * h)
    comb = phi_derivative_combination(volterra_solve(x, 0.0, params, method="degenerate"))
    assert abs(comb - (-dphi_dx)) < 1e-5


def test_neumann_identities(params):
    for x in (2.5, 4.0):
        no = neumann_orders(x, params)
        assert no.second_identity < 1e-6 * abs(no.glm[0]) ** 2


def test_volterra_errors(params):
    with pytest.raises(ValidityError):
        volterra_solve(2.0, 2.5, params)
    with pytest.raises(TruncationError):
        volterra_solve(2.0, 0.0, params, L=2.0)
    with pytest.raises(DomainError):
        neumann_orders(2.0, params, order=4)
