"""Equal-time twist-field correlators from the circle form-factor expansion.

The N-particle block is

    N_ff(x) = sum_{n_1 > ... > n_N} prod_i a_i prod_{p<q} tanh^2((th_p - th_q)/2),
    a_i = g(th_i)^2 exp(-m x cosh th_i),

with ``th_i`` the R-sector rapidities. ``prod tanh^2`` is the Cauchy
determinant ``det[sech((th_p - th_q)/2)]``, so ``N_ff`` is the N-th elementary
symmetric function of the eigenvalues of ``D M`` with ``D = diag(a)`` and
``M = sech((th_p - th_q)/2)``. Small active sets are enumerated directly,
which keeps full relative precision for the tiny high-N blocks.
"""
from __future__ import annotations

from dataclasses import dataclass, field
from itertools import combinations
from math import comb

import numpy as np

from .errors import DomainError, TailTooLarge
from .specfn import (DEFAULT_CFG, QuadratureConfig, ThermalParams, delta_vacuum_energy,
                     quantized_rapidity, s_T, thermal_weight)

__all__ = [
    "CircleModeSet", "TruncationPolicy", "g_circle", "ff_tanh_product",
    "particle_blocks", "correlator_equal_time", "phi_equal_time",
    "dphi_dtau", "one_particle", "phi_profile",
]

_DIRECT_BUDGET = 50_000


def g_circle(theta, params: ThermalParams, cfg: QuadratureConfig | None = None):
    """Circle normalisation ``g(theta)``; ``g^2 = w(theta) / (m beta cosh theta)``.

    ``w`` is :func:`thermal_weight`, so ``g < 1/sqrt(m beta cosh theta)``.
    """
    theta = np.asarray(theta, dtype=float)
    w = thermal_weight(theta, params, cfg)
    return np.sqrt(w / (params.ratio * np.cosh(theta)))


def ff_tanh_product(thetas) -> float:
    """``prod_{p<q} tanh((theta_p - theta_q)/2)``; empty products give 1."""
    th = np.asarray(thetas, dtype=float).ravel()
    if th.size < 2:
        return 1.0
    p, q = np.triu_indices(th.size, k=1)
    return float(np.prod(np.tanh(0.5 * (th[p] - th[q]))))


@dataclass
class CircleModeSet:
    """R-sector modes ``|n| <= n_max`` with cached rapidities and ``g^2``."""

    params: ThermalParams
    n_max: int = 20
    cfg: QuadratureConfig = field(default_factory=lambda: DEFAULT_CFG)

    def __post_init__(self):
        if self.n_max < 0:
            raise DomainError("n_max must be non-negative")
        self.n_values = np.arange(-self.n_max, self.n_max + 1)
        self.theta_n = quantized_rapidity(self.n_values, self.params)
        self.cosh_n = np.cosh(self.theta_n)
        w = np.atleast_1d(thermal_weight(self.theta_n, self.params, self.cfg))
        self.weight = w
        self.g2 = w / (self.params.ratio * self.cosh_n)
        self.momentum = 2.0 * np.pi * self.n_values * self.params.T
        self.sech = 1.0 / np.cosh(0.5 * (self.theta_n[:, None] - self.theta_n[None, :]))

    @property
    def g_circle(self) -> np.ndarray:
        return np.sqrt(self.g2)

    def amplitudes(self, x: float, tau: float = 0.0) -> np.ndarray:
        a = self.g2 * np.exp(-self.params.m * x * self.cosh_n)
        if tau != 0.0:
            a = a * np.exp(-1j * tau * self.momentum)
        return a


@dataclass(frozen=True)
class TruncationPolicy:
    n_max: int = 20
    n_sigma: int = 4
    n_mu: int = 3
    tail_tol: float = 1e-10

    def __post_init__(self):
        if self.n_max < 0 or self.n_sigma < 0 or self.n_mu < 1:
            raise DomainError("invalid truncation orders")
        if self.n_sigma % 2 or not self.n_mu % 2:
            raise DomainError("n_sigma must be even and n_mu odd")

    @property
    def n_particles(self) -> int:
        return max(self.n_sigma, self.n_mu)

    def check(self, x: float, params: ThermalParams):
        th = quantized_rapidity(self.n_max, params)
        tail = np.exp(-params.m * x * np.cosh(th))
        if tail >= self.tail_tol:
            raise TailTooLarge(
                f"mode tail exp(-m x cosh theta_nmax) = {tail:.3g} >= {self.tail_tol:g} at x = {x}")


def _blocks_direct(a, th, n_part):
    out = np.zeros(n_part + 1, dtype=a.dtype)
    out[0] = 1.0
    k = a.size
    for N in range(1, min(n_part, k) + 1):
        idx = np.array(list(combinations(range(k), N)))
        terms = np.prod(a[idx], axis=1)
        if N > 1:
            p, q = np.triu_indices(N, k=1)
            t = np.tanh(0.5 * (th[idx[:, p]] - th[idx[:, q]]))
            terms = terms * np.prod(t * t, axis=1)
        out[N] = terms.sum()
    return out


def _blocks_eigen(a, sech, n_part):
    lam = np.linalg.eigvals(a[:, None] * sech)
    e = np.zeros(n_part + 1, dtype=complex)
    e[0] = 1.0
    for v in lam:
        e[1:] = e[1:] + v * e[:-1]
    if np.isrealobj(a):
        return e.real
    return e


def particle_blocks(x: float, modes: CircleModeSet, n_part: int, tau: float = 0.0,
                    method: str = "auto", rel_cut: float = 1e-22) -> np.ndarray:
    """Blocks ``[1, 1_ff, 2_ff, ..., n_part_ff]`` at distance ``x``.

    ``method`` is ``'direct'`` (ordered tuples), ``'determinant'`` (elementary
    symmetric functions of the Cauchy-weighted eigenvalues) or ``'auto'``.
    Modes with ``|a_i| < rel_cut max|a|`` are dropped in the direct route.
    """
    if method not in ("auto", "direct", "determinant"):
        raise DomainError(f"unknown method {method!r}")
    a = modes.amplitudes(x, tau)
    if method == "determinant":
        return _blocks_eigen(a, modes.sech, n_part)
    keep = np.abs(a) >= rel_cut * np.abs(a).max()
    k = int(keep.sum())
    work = sum(comb(k, N) for N in range(1, n_part + 1))
    if method == "auto" and work > _DIRECT_BUDGET:
        return _blocks_eigen(a, modes.sech, n_part)
    return _blocks_direct(a[keep], modes.theta_n[keep], n_part)


def one_particle(x: float, modes: CircleModeSet) -> float:
    """``1_ff = sum_n g(theta_n)^2 exp(-m x cosh theta_n)``."""
    return float(np.sum(modes.amplitudes(x)))


def _prefactor(x, params, cfg):
    return s_T(params, cfg) ** 2 * np.exp(-params.m * delta_vacuum_energy(params, cfg) * x)


def correlator_equal_time(x: float, params: ThermalParams, policy: TruncationPolicy | None = None,
                          field: str = "sigma", modes: CircleModeSet | None = None,
                          cfg: QuadratureConfig | None = None) -> float:
    """``G`` (``field='sigma'``, even N) or ``G~`` (``field='mu'``, odd N) at ``t = 0``."""
    policy = policy or TruncationPolicy()
    cfg = cfg or DEFAULT_CFG
    if x <= 0:
        raise DomainError("x must be positive")
    if field not in ("sigma", "mu"):
        raise DomainError(f"unknown field {field!r}")
    policy.check(x, params)
    modes = modes or CircleModeSet(params, policy.n_max, cfg)
    cap = policy.n_sigma if field == "sigma" else policy.n_mu
    e = particle_blocks(x, modes, cap)
    start = 0 if field == "sigma" else 1
    return float(_prefactor(x, params, cfg) * np.sum(e[start::2]))


def phi_equal_time(x: float, params: ThermalParams, policy: TruncationPolicy | None = None,
                   modes: CircleModeSet | None = None, tau: float = 0.0,
                   method: str = "auto", check_tail: bool = True):
    """``phi = 2 artanh(G~/G)``; the prefactor ``s_T^2 exp(-dE x)`` cancels.

    ``G ~ cosh(phi/2)`` and ``G~ ~ sinh(phi/2)``, hence the factor 2; at
    large ``x`` this tends to ``2 * 1_ff``. A nonzero imaginary time
    ``tau`` multiplies each mode by ``exp(-i tau 2 pi n T)``.
    """
    policy = policy or TruncationPolicy()
    if x <= 0:
        raise DomainError("x must be positive")
    if check_tail:
        policy.check(x, params)
    modes = modes or CircleModeSet(params, policy.n_max)
    e = particle_blocks(x, modes, policy.n_particles, tau=tau, method=method)
    out = _phi_from_blocks(e, policy, x)
    return float(np.real(out)) if tau == 0.0 else complex(out)


def dphi_dtau(x: float, params: ThermalParams, policy: TruncationPolicy | None = None,
              modes: CircleModeSet | None = None, step: float = 1e-3,
              check_tail: bool = True) -> float:
    """Symmetric difference of ``phi`` in imaginary time at ``tau = 0``."""
    policy = policy or TruncationPolicy()
    modes = modes or CircleModeSet(params, policy.n_max)
    up = phi_equal_time(x, params, policy, modes, tau=step, check_tail=check_tail)
    dn = phi_equal_time(x, params, policy, modes, tau=-step, check_tail=check_tail)
    return float(np.real(up - dn) / (2.0 * step))


def phi_profile(xs, params: ThermalParams, policy: TruncationPolicy | None = None,
                modes: CircleModeSet | None = None, tau: float = 0.0,
                method: str = "determinant") -> np.ndarray:
    """``phi`` on a grid, even in ``x`` and allowed down to ``x = 0``.

    No tail check is made: near the origin the result is the truncated
    series, finite but not the true profile. The determinant route is the
    default here since only absolute accuracy of ``phi`` matters.
    """
    policy = policy or TruncationPolicy()
    modes = modes or CircleModeSet(params, policy.n_max)
    xs = np.asarray(xs, dtype=float)
    ax, inv = np.unique(np.round(np.abs(xs), 12), return_inverse=True)
    if method == "determinant":
        out = _phi_batched(ax, modes, policy, tau)
    else:
        out = np.empty(ax.size, dtype=complex if tau else float)
        for k, x in enumerate(ax):
            e = particle_blocks(x, modes, policy.n_particles, tau=tau, method=method)
            out[k] = _phi_from_blocks(e, policy, x)
    return out[inv].reshape(xs.shape)


def _phi_from_blocks(e, policy, x):
    ratio = np.sum(e[..., 1:policy.n_mu + 1:2], axis=-1) / np.sum(e[..., 0:policy.n_sigma + 1:2], axis=-1)
    if np.any(np.abs(ratio) >= 1.0):
        raise DomainError(f"G~/G is not below 1 at x = {np.atleast_1d(x)[np.abs(ratio) >= 1.0]}")
    return 2.0 * np.arctanh(ratio)


def _phi_batched(ax, modes, policy, tau, chunk=2048):
    n_part = policy.n_particles
    out = np.empty(ax.size, dtype=complex if tau else float)
    for s in range(0, ax.size, chunk):
        x = ax[s:s + chunk]
        a = modes.g2[None, :] * np.exp(-modes.params.m * x[:, None] * modes.cosh_n[None, :])
        if tau:
            a = a * np.exp(-1j * tau * modes.momentum)[None, :]
            lam = np.linalg.eigvals(a[:, :, None] * modes.sech[None, :, :])
        else:
            r = np.sqrt(a)
            lam = np.linalg.eigvalsh(r[:, :, None] * modes.sech[None, :, :] * r[:, None, :])
        e = np.zeros((x.size, n_part + 1), dtype=complex)
        e[:, 0] = 1.0
        for k in range(lam.shape[1]):
            e[:, 1:] = e[:, 1:] + lam[:, k:k + 1] * e[:, :-1]
        phi = _phi_from_blocks(e, policy, x)
        out[s:s + chunk] = phi if tau else phi.real
    return out
