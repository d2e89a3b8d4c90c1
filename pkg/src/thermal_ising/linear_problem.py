"""Forward scattering for the x-part of the linear problem.

The connection is

    A_x = (i/4) [[2i phi_t, m(lam e^-phi - e^phi/lam)],
                 [m(lam e^phi - e^-phi/lam), -2i phi_t]],   lam = e^theta,

and Psi_+ is started as exp(i p x/2)(1, 1) at ``x_max`` and integrated down to
``x_min`` with fixed-step RK4. At ``x_min`` the solution is split as

    Psi = a exp(i p x/2)(1, 1) - b exp(-i p x/2)(1, -1).
"""
from __future__ import annotations

from dataclasses import dataclass, field
from typing import Callable

import numpy as np

from .errors import DomainError, NonDecayedProfile, StepSizeError
from .form_factors import CircleModeSet, TruncationPolicy, phi_profile
from .scattering import jost_a, jost_b
from .specfn import ThermalParams

__all__ = [
    "FieldProfile", "JostRun", "LambdaAsymptoticsReport", "ScatterCheckReport",
    "connection_Ax", "integrate_linear_problem", "integrate_jost_plus",
    "wronskian", "check_lambda_asymptotics", "scatter_check",
]

ArrayFn = Callable[[np.ndarray], np.ndarray]


def _zeros(x):
    return np.zeros_like(np.asarray(x, dtype=float))


@dataclass
class FieldProfile:
    """Real field ``phi(x)`` and its time derivative on ``[x_min, x_max]``.

    Both callables take and return arrays.
    """

    phi: ArrayFn
    dphi_dt: ArrayFn = _zeros
    x_min: float = -10.0
    x_max: float = 10.0
    decay_tol: float = 1e-6

    def __post_init__(self):
        if not self.x_max > self.x_min:
            raise DomainError("x_max must exceed x_min")

    def validate(self):
        ends = np.abs(self.phi(np.array([self.x_min, self.x_max])))
        if np.any(ends >= self.decay_tol):
            raise NonDecayedProfile(
                f"|phi| at the domain ends is {ends.max():.3g}, not below {self.decay_tol:g}")

    @classmethod
    def zero(cls, x_min: float = -10.0, x_max: float = 10.0) -> "FieldProfile":
        return cls(_zeros, _zeros, x_min, x_max)

    @classmethod
    def from_circle_expansion(cls, params: ThermalParams, policy: TruncationPolicy | None = None,
                              x_min: float = -10.0, x_max: float = 10.0, tau_step: float = 1e-3,
                              decay_tol: float = 1e-6) -> "FieldProfile":
        """Even profile from the truncated circle expansion.

        The time derivative is ``i d/dtau`` by symmetric difference in
        imaginary time; it vanishes since the expansion is even in ``tau``.
        """
        policy = policy or TruncationPolicy()
        modes = CircleModeSet(params, policy.n_max)

        def phi(x):
            return phi_profile(x, params, policy, modes)

        def dphi_dt(x):
            up = phi_profile(x, params, policy, modes, tau=tau_step)
            dn = phi_profile(x, params, policy, modes, tau=-tau_step)
            return np.real(1j * (up - dn) / (2.0 * tau_step))

        return cls(phi, dphi_dt, x_min, x_max, decay_tol)


def _lam(theta):
    return np.exp(np.asarray(theta, dtype=complex))


def _connection(phi, phit, lam, m):
    ep, em = np.exp(phi), np.exp(-phi)
    A = np.empty(np.shape(phi) + (2, 2), dtype=complex)
    A[..., 0, 0] = -0.5 * phit
    A[..., 1, 1] = 0.5 * phit
    A[..., 0, 1] = 0.25j * m * (lam * em - ep / lam)
    A[..., 1, 0] = 0.25j * m * (lam * ep - em / lam)
    return A


def connection_Ax(x, theta, profile: FieldProfile, params: ThermalParams) -> np.ndarray:
    """``A_x`` at position(s) ``x``; shape ``(..., 2, 2)``."""
    x = np.asarray(x, dtype=float)
    return _connection(profile.phi(x), profile.dphi_dt(x), _lam(theta), params.m)


@dataclass
class JostRun:
    theta: complex
    x: np.ndarray
    psi: np.ndarray
    a_num: complex | None = None
    b_num: complex | None = None
    step_error: float = 0.0


def _rk4(A, psi0, h):
    """RK4 on nodes ``A[0], A[1], ...`` spaced ``h/2``; returns values every ``h``."""
    n = (A.shape[0] - 1) // 2
    out = np.empty((n + 1, 2), dtype=complex)
    out[0] = psi = psi0
    for k in range(n):
        A0, A1, A2 = A[2 * k], A[2 * k + 1], A[2 * k + 2]
        k1 = A0 @ psi
        k2 = A1 @ (psi + 0.5 * h * k1)
        k3 = A1 @ (psi + 0.5 * h * k2)
        k4 = A2 @ (psi + h * k3)
        psi = psi + h / 6.0 * (k1 + 2.0 * k2 + 2.0 * k3 + k4)
        out[k + 1] = psi
    return out


def integrate_linear_problem(theta, profile: FieldProfile, params: ThermalParams, psi0,
                             step: float = 1e-3, tol: float = 1e-6,
                             tables: tuple[np.ndarray, np.ndarray] | None = None) -> JostRun:
    """Integrate ``(d/dx - A_x) Psi = 0`` from ``x_max`` down to ``x_min``.

    ``step_error`` is the step-halving estimate ``|Psi_h - Psi_2h| / 15``
    relative to ``|Psi|``; ``StepSizeError`` is raised above ``tol``.
    ``tables`` may carry precomputed ``(phi, dphi_dt)`` on the ``step/2`` grid.
    """
    lam = _lam(theta)
    p = 0.5 * params.m * (lam - 1.0 / lam)
    if abs(p) * step >= 0.1:
        raise StepSizeError(f"|p| * step = {abs(p) * step:.3g} is not below 0.1")
    span = profile.x_max - profile.x_min
    n = 2 * int(np.ceil(span / (2.0 * step)))
    h = -span / n
    nodes = profile.x_max + 0.5 * h * np.arange(2 * n + 1)
    if tables is None:
        phi, phit = profile.phi(nodes), profile.dphi_dt(nodes)
    else:
        phi, phit = tables
    A = _connection(phi, phit, lam, params.m)
    psi0 = np.asarray(psi0, dtype=complex)
    fine = _rk4(A, psi0, h)
    coarse = _rk4(A[::2], psi0, 2.0 * h)
    err = float(np.max(np.abs(fine[::2] - coarse)) / 15.0 / np.max(np.abs(fine)))
    if err > tol:
        raise StepSizeError(f"step-halving error estimate {err:.3g} exceeds {tol:g}")
    return JostRun(complex(theta), nodes[::2].copy(), fine, step_error=err)


def _tables(profile, step):
    span = profile.x_max - profile.x_min
    n = 2 * int(np.ceil(span / (2.0 * step)))
    nodes = profile.x_max - 0.5 * span / n * np.arange(2 * n + 1)
    return profile.phi(nodes), profile.dphi_dt(nodes)


def integrate_jost_plus(theta, profile: FieldProfile, params: ThermalParams, step: float = 1e-3,
                        tol: float = 1e-6, validate: bool = True,
                        tables: tuple[np.ndarray, np.ndarray] | None = None) -> JostRun:
    """``Psi_+`` from the plane wave ``exp(i p x_max/2)(1, 1)`` with extracted ``a, b``."""
    if validate:
        profile.validate()
    lam = _lam(theta)
    p = 0.5 * params.m * (lam - 1.0 / lam)
    psi0 = np.exp(0.5j * p * profile.x_max) * np.array([1.0, 1.0])
    run = integrate_linear_problem(theta, profile, params, psi0, step, tol, tables)
    u, l = run.psi[-1]
    x = run.x[-1]
    run.a_num = complex(np.exp(-0.5j * p * x) * 0.5 * (u + l))
    run.b_num = complex(-np.exp(0.5j * p * x) * 0.5 * (u - l))
    return run


def wronskian(run1: JostRun, run2: JostRun) -> np.ndarray:
    """``det(Psi_1, Psi_2)`` along the grid; constant since ``tr A_x = 0``."""
    return run1.psi[:, 0] * run2.psi[:, 1] - run1.psi[:, 1] * run2.psi[:, 0]


@dataclass
class LambdaAsymptoticsReport:
    thetas: np.ndarray
    deviations: np.ndarray
    ratio: float
    monotone: bool


def _lambda_deviation(theta, profile, params, step, tables):
    run = integrate_jost_plus(theta, profile, params, step, tol=1e-4, validate=False, tables=tables)
    p = params.m * np.sinh(theta)
    phi = tables[0][::2] if tables is not None else profile.phi(run.x)
    lead = np.stack([np.exp(-0.5 * phi), np.exp(0.5 * phi)], axis=-1)
    return float(np.max(np.abs(run.psi * np.exp(-0.5j * p * run.x)[:, None] - lead)))


def check_lambda_asymptotics(profile: FieldProfile, params: ThermalParams, theta_large: float = 4.0,
                             step: float = 5e-4) -> LambdaAsymptoticsReport:
    """Deviation of ``Psi_+ e^{-ipx/2}`` from ``e^{-phi sigma_z/2}(1,1)``.

    Evaluated at ``theta_large - 1, theta_large, theta_large + ln 2``; the
    ratio between the last two should be close to 2.
    """
    if theta_large < 3:
        raise DomainError("theta_large must be at least 3")
    thetas = np.array([theta_large - 1.0, theta_large, theta_large + np.log(2.0)])
    p_max = params.m * np.sinh(thetas[-1])
    step = min(step, 0.05 / p_max)
    tables = _tables(profile, step)
    dev = np.array([_lambda_deviation(t, profile, params, step, tables) for t in thetas])
    return LambdaAsymptoticsReport(thetas, dev, float(dev[1] / dev[2]),
                                   bool(np.all(np.diff(dev) < 0)))


@dataclass
class ScatterCheckReport:
    theta: float
    a_num: complex
    a_exact: complex
    b_num: complex
    b_exact: complex
    rel_dev_upper: float
    rel_dev_a: float
    rel_dev_b: float
    unitarity_num: float
    unitarity_exact: float
    tol: float
    run: JostRun = field(repr=False)

    @property
    def passed(self) -> bool:
        return self.rel_dev_upper <= self.tol


def scatter_check(params: ThermalParams | None = None, p_theta: float = 1.0, n_max: int = 20,
                  n_particles: int = 6, x_range: tuple[float, float] = (-10.0, 10.0),
                  step: float = 1e-3, tol: float = 0.05,
                  profile: FieldProfile | None = None) -> ScatterCheckReport:
    """Jost data from the circle-expansion profile versus the closed forms.

    The figure of merit is the relative deviation of the upper component of
    ``Psi_+`` at ``x_min`` from ``a e^{ipx/2} - b e^{-ipx/2}``; the separate
    deviations of ``a`` and ``b`` are reported too. ``|a|^2 - |b|^2`` is
    returned for both sides since it separates even profiles from the data.
    """
    params = params or ThermalParams()
    if profile is None:
        n_sigma = n_particles - n_particles % 2
        n_mu = n_particles - 1 + n_particles % 2
        policy = TruncationPolicy(n_max, n_sigma, n_mu)
        # phi(10) ~ 6e-5 at m = T = 1, so the end-point test is loosened here
        profile = FieldProfile.from_circle_expansion(params, policy, *x_range, decay_tol=1e-3)
    theta = float(np.arcsinh(p_theta / params.m))
    run = integrate_jost_plus(theta, profile, params, step)
    a_ex = complex(jost_a(theta, params))
    b_ex = complex(jost_b(theta, 0.0, params))
    x = run.x[-1]
    p = params.m * np.sinh(theta)
    up_ex = a_ex * np.exp(0.5j * p * x) - b_ex * np.exp(-0.5j * p * x)
    rel_up = abs(run.psi[-1, 0] - up_ex) / abs(up_ex)
    return ScatterCheckReport(
        theta, run.a_num, a_ex, run.b_num, b_ex, float(rel_up),
        abs(run.a_num - a_ex) / abs(a_ex), abs(run.b_num - b_ex) / abs(b_ex),
        abs(run.a_num) ** 2 - abs(run.b_num) ** 2, abs(a_ex) ** 2 - abs(b_ex) ** 2, tol, run)
