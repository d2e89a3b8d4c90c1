"""Initial scattering data of the thermal twist-field linear problem.

All functions take rapidities; ``lambda = exp(theta)``. The ``lambda < 0``
half line is reached as ``theta + i pi`` with real ``theta``.
"""
from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .errors import DomainError, PoleError
from .specfn import QuadratureConfig, ThermalParams, g_pm, h_pm

__all__ = [
    "alpha", "beta", "jost_a", "jost_b", "jost_c", "jost_d",
    "reflection_r", "ScatteringData",
]


def _boltzmann(theta, params):
    return np.exp(-params.ratio * np.cosh(np.asarray(theta)))


def alpha(theta, params: ThermalParams):
    """``(1 + q)/(1 - q)`` with ``q = exp(-E_theta/T)``."""
    q = _boltzmann(theta, params)
    den = 1.0 - q
    if np.any(np.abs(den) < 1e-14):
        raise PoleError("alpha has a pole on the lattice theta_n +- i pi/2")
    out = (1.0 + q) / den
    return out[()] if np.ndim(out) == 0 else out


def beta(theta, params: ThermalParams):
    """``2 g_+(theta)``; equals ``1 + alpha`` identically."""
    q = _boltzmann(theta, params)
    den = 1.0 - q
    if np.any(np.abs(den) < 1e-14):
        raise PoleError("beta has a pole on the lattice theta_n +- i pi/2")
    out = 2.0 / den
    return out[()] if np.ndim(out) == 0 else out


def jost_a(theta, params: ThermalParams, cfg: QuadratureConfig | None = None):
    """Jost function ``a = i / (2 pi h_+^2)`` for ``0 <= Im theta <= pi``."""
    th = np.asarray(theta, dtype=complex)
    if np.any(th.imag < -1e-14) or np.any(th.imag > np.pi + 1e-14):
        raise DomainError("jost_a is defined on the strip 0 <= Im theta <= pi")
    h = h_pm(1, th, params, cfg)
    return 1j / (2.0 * np.pi * h * h)


def jost_b(theta, t, params: ThermalParams):
    """``b(theta, t) = 2 i g_-(theta) exp(i E_theta t)``."""
    theta = np.asarray(theta)
    E = params.m * np.cosh(theta)
    return 2j * g_pm(-1, theta, params) * np.exp(1j * E * t)


def jost_c(theta, params: ThermalParams):
    """Companion coefficient ``c = 2 i g_+``."""
    return 2j * g_pm(1, theta, params)


def jost_d(theta, params: ThermalParams, cfg: QuadratureConfig | None = None):
    """Companion coefficient ``d = -2 pi i alpha^2 h_-^2`` (equal to ``-a``)."""
    h = h_pm(-1, theta, params, cfg)
    al = alpha(theta, params)
    return -2j * np.pi * al * al * h * h


def reflection_r(theta, t, params: ThermalParams, branch: str = "positive",
                 cfg: QuadratureConfig | None = None):
    """Reflection coefficient ``r(lambda, t) = b(-lambda, t) / a(lambda)``.

    ``branch='positive'`` gives ``r(theta)``; ``branch='negative'`` gives
    ``r(theta + i pi)``; ``theta`` may be complex on the positive branch
    (used by contour-shifted quadratures).
    """
    theta = np.asarray(theta)
    E = params.m * np.cosh(theta)
    if branch == "positive":
        h = h_pm(1, theta, params, cfg)
        return 4.0 * np.pi * g_pm(1, theta, params) * h * h * np.exp(-1j * E * t)
    if branch == "negative":
        h = h_pm(-1, theta, params, cfg)
        return -4.0 * np.pi * g_pm(-1, theta, params) * h * h * np.exp(1j * E * t)
    raise DomainError(f"unknown branch {branch!r}")


@dataclass
class ScatteringData:
    """Scattering data ``a(theta)`` and ``b(theta, t)`` for one temperature."""

    params: ThermalParams
    t: float = 0.0
    cfg: QuadratureConfig = field(default_factory=QuadratureConfig)

    def a(self, theta):
        return jost_a(theta, self.params, self.cfg)

    def b0(self, theta):
        return jost_b(theta, 0.0, self.params)

    def b(self, theta):
        return jost_b(theta, self.t, self.params)

    def c(self, theta):
        return jost_c(theta, self.params)

    def d(self, theta):
        return jost_d(theta, self.params, self.cfg)

    def alpha(self, theta):
        return alpha(theta, self.params)

    def beta(self, theta):
        return beta(theta, self.params)

    def r(self, theta, branch: str = "positive"):
        return reflection_r(theta, self.t, self.params, branch, self.cfg)
