"""Special functions shared by the scattering, form-factor and GLM modules.

Conventions: rapidities are dimensionless, ``E = m cosh(theta)`` and every
Boltzmann factor is ``exp(-E / T)``. The thermal log kernel is

    L(theta) = ln((1 + q) / (1 - q)),   q = exp(-m cosh(theta) / T),

which is ``2 artanh(q)`` and is evaluated that way for accuracy.
"""
from __future__ import annotations

from dataclasses import dataclass
import numpy as np
from scipy import special

from .errors import ConvergenceError, DomainError, NearSingularity, PoleError
from .quadrature import decay_extent, tanh_sinh, trapezoid_line

__all__ = [
    "ThermalParams", "SpectralPoint", "QuadratureConfig", "GLAISHER_A",
    "bessel_k", "thermal_log_kernel", "h_pm", "h_pm_contour", "g_pm",
    "quantized_rapidity", "delta_vacuum_energy", "s_T", "c_mu_coefficients",
    "thermal_weight", "log_kernel_moment",
]

GLAISHER_A = 1.2824271291006226368753425688697917  # Glaisher-Kinkelin constant
MU_MAX = 12


@dataclass(frozen=True)
class ThermalParams:
    """Mass ``m`` and temperature ``T`` in common energy units."""

    m: float = 1.0
    T: float = 1.0

    def __post_init__(self):
        m, T = float(self.m), float(self.T)
        if not (np.isfinite(m) and m > 0):
            raise DomainError(f"mass must be positive and finite, got {self.m!r}")
        if not (np.isfinite(T) and T > 0):
            raise DomainError(f"temperature must be positive and finite, got {self.T!r}")
        if not np.isfinite(m / T) or m / T == 0:
            raise DomainError("m/T must be finite and nonzero")
        object.__setattr__(self, "m", m)
        object.__setattr__(self, "T", T)

    @property
    def beta(self) -> float:
        return 1.0 / self.T

    @property
    def ratio(self) -> float:
        """Dimensionless ``m / T``."""
        return self.m / self.T


@dataclass(frozen=True)
class SpectralPoint:
    """Complex rapidity with derived kinematics."""

    theta: complex
    m: float = 1.0

    @property
    def lam(self) -> complex:
        return np.exp(self.theta)

    @property
    def energy(self) -> complex:
        return self.m * np.cosh(self.theta)

    @property
    def momentum(self) -> complex:
        return self.m * np.sinh(self.theta)


@dataclass(frozen=True)
class QuadratureConfig:
    """Tolerances shared by all quadratures.

    ``pv_offset`` is the imaginary shift of the validation contour for
    principal-value integrals, ``guard_radius`` the minimal distance in
    rapidity to a pole or zero of the thermal functions.
    """

    abs_tol: float = 1e-13
    rel_tol: float = 1e-12
    max_levels: int = 8
    pv_offset: float = 0.25
    guard_radius: float = 1e-3
    mu_max: int = MU_MAX

    def __post_init__(self):
        if self.abs_tol <= 0 or self.rel_tol <= 0:
            raise DomainError("tolerances must be positive")
        if self.pv_offset <= 0:
            raise DomainError("pv_offset must be positive")
        if self.max_levels < 1:
            raise DomainError("max_levels must be at least 1")


DEFAULT_CFG = QuadratureConfig()


def _cfg(cfg):
    return DEFAULT_CFG if cfg is None else cfg


# --------------------------------------------------------------------------
# Bessel K

def bessel_k(order: int, z, mu_max: int = MU_MAX):
    """Modified Bessel function ``K_order(z)`` for integer order.

    Complex arguments are evaluated on the principal branch, which for
    purely imaginary ``z`` is the boundary value reached from ``Re z > 0``.
    Backed by the AMOS routines in :func:`scipy.special.kv`.
    """
    order = int(order)
    if order < 0:
        order = -order  # K_{-n} = K_n
    if order > mu_max:
        raise DomainError(f"order {order} exceeds mu_max = {mu_max}")
    z = np.asarray(z, dtype=complex)
    if np.any(z == 0):
        raise DomainError("K_n(z) is singular at z = 0")
    out = special.kv(order, z)
    return out[()] if out.ndim == 0 else out


# --------------------------------------------------------------------------
# thermal log kernel and relatives

def _q(theta, params: ThermalParams):
    return np.exp(-params.ratio * np.cosh(theta))


def thermal_log_kernel(theta, params: ThermalParams):
    """``L(theta) = ln((1+q)/(1-q))`` with ``q = exp(-E_theta / T)``.

    Accepts complex rapidities with ``|Im theta| < pi/2``, where ``|q| < 1``
    and the principal branch is the analytic continuation from the real line.
    """
    theta = np.asarray(theta)
    L = 2.0 * np.arctanh(_q(theta, params))
    return L[()] if L.ndim == 0 else L


def _log_kernel_prime(theta, params):
    q = _q(theta, params)
    return -2.0 * params.ratio * np.sinh(theta) * q / (1.0 - q * q)


def _extent(params: ThermalParams, power: float = 0.0, drop: float = 42.0) -> float:
    """Half-width beyond which ``exp(power*s) L(s)`` is ``e^-drop`` below its peak."""
    def logabs(s):
        return power * s + np.log(thermal_log_kernel(s, params) + 1e-320)
    return decay_extent(logabs, 0.0, drop=drop, step=0.125)


def g_pm(sign: int, theta, params: ThermalParams, sector: str = "R"):
    """Occupation factors ``g_+-``.

    R sector: ``1/(1 - exp(-+E/T))``; NS sector: ``1/(1 + exp(-+E/T))``.
    """
    if sign not in (1, -1):
        raise DomainError("sign must be +1 or -1")
    if sector not in ("R", "NS"):
        raise DomainError(f"unknown sector {sector!r}")
    x = -sign * params.ratio * np.cosh(np.asarray(theta))
    with np.errstate(over="ignore"):
        if sector == "R":
            den = -np.expm1(x)
        else:
            den = 1.0 + np.exp(x)
    tiny = np.abs(den) < 1e-14
    if np.any(tiny):
        raise PoleError(f"g_{'+' if sign > 0 else '-'} has a pole at theta = {np.asarray(theta)[tiny]}")
    out = 1.0 / den
    return out[()] if np.ndim(out) == 0 else out


def quantized_rapidity(n, params: ThermalParams):
    """``theta_n = arcsinh(2 pi n T / m)``."""
    return np.arcsinh(2.0 * np.pi * np.asarray(n, dtype=float) / params.ratio)


def thermal_weight(theta, params: ThermalParams, cfg: QuadratureConfig | None = None):
    """``exp(-(1/pi) * integral L(s) / cosh(theta - s) ds)`` for real theta.

    This is the exponential factor that multiplies every circle form factor
    and every residue of the GLM kernels; it lies in ``(0, 1)``.
    """
    cfg = _cfg(cfg)
    theta = np.atleast_1d(np.asarray(theta, dtype=float))
    width = _extent(params)

    def f(s):
        return thermal_log_kernel(s, params)[None, :] / np.cosh(theta[:, None] - s[None, :])

    res = trapezoid_line(f, -width, width, 0.2, cfg.abs_tol, cfg.rel_tol, cfg.max_levels)
    out = np.exp(-res.value / np.pi)
    return out if out.size > 1 else float(out[0])


# --------------------------------------------------------------------------
# h functions

_PHASE = np.exp(0.25j * np.pi) / np.sqrt(2.0 * np.pi)


def _pv_integral(theta_r: np.ndarray, params: ThermalParams, cfg: QuadratureConfig):
    """``PV int L(s)/sinh(theta - s) ds`` for real theta.

    Written as ``(1/2) int_R [L(theta-u) - L(theta+u)] / sinh(u) du``; the
    integrand is even in ``u`` with the removable value ``-2 L'(theta)`` at 0.
    """
    # power-of-two step keeps u = 0 an exact node at every level
    h0 = 0.125
    width = h0 * np.ceil((_extent(params) + float(np.max(np.abs(theta_r)))) / h0)

    def f(u):
        uu = u[None, :]
        th = theta_r[:, None]
        num = thermal_log_kernel(th - uu, params) - thermal_log_kernel(th + uu, params)
        with np.errstate(invalid="ignore", divide="ignore"):
            val = num / np.sinh(uu)
        zero = u == 0.0
        if np.any(zero):
            val[:, zero] = -2.0 * _log_kernel_prime(theta_r, params)[:, None]
        return val

    res = trapezoid_line(f, -width, width, h0, cfg.abs_tol, cfg.rel_tol, cfg.max_levels)
    return 0.5 * res.value


def _contour_integral(theta: np.ndarray, c: np.ndarray, params, cfg):
    """``int_R L(s + i c) / sinh(theta - s - i c) ds`` with one shift per theta."""
    width = _extent(params) + float(np.max(np.abs(theta.real)))

    def f(s):
        z = s[None, :] + 1j * c[:, None]
        return thermal_log_kernel(z, params) / np.sinh(theta[:, None] - z)

    res = trapezoid_line(f, -width, width, 0.1, cfg.abs_tol, cfg.rel_tol, cfg.max_levels)
    return res.value


def _strip_shift(b: np.ndarray) -> np.ndarray:
    """Contour height midway between the nearest singular lines, for 0 <= Im theta <= pi."""
    lo = np.maximum(-0.5 * np.pi, b - np.pi)
    hi = np.minimum(0.5 * np.pi, b)
    return 0.5 * (lo + hi)


def _h_plus_upper(theta: np.ndarray, params, cfg) -> np.ndarray:
    """``h_+`` on ``0 <= Im theta <= pi``."""
    out = np.empty(theta.shape, dtype=complex)
    b = theta.imag
    real = b == 0.0
    if np.any(real):
        th = theta.real[real]
        pv = _pv_integral(th, params, cfg)
        expo = pv / (2j * np.pi) - 0.5 * thermal_log_kernel(th, params)
        out[real] = _PHASE * np.exp(expo)
    rest = ~real
    if np.any(rest):
        th = theta[rest]
        integral = _contour_integral(th, _strip_shift(b[rest]), params, cfg)
        out[rest] = _PHASE * np.exp(integral / (2j * np.pi))
    return out


def _alpha(theta, params):
    q = _q(theta, params)
    return (1.0 + q) / (1.0 - q)


def _check_lattice(theta: np.ndarray, side: int, params, cfg):
    """Raise if theta is within the guard radius of ``theta_n + side*i*pi/2``."""
    r = params.ratio
    nc = r * np.sinh(theta.real) / (2.0 * np.pi)
    for k in (-1, 0, 1, 2):
        n = np.floor(2.0 * nc) / 2.0 + 0.5 * k
        pts = quantized_rapidity(n, params) + side * 0.5j * np.pi
        d = np.abs(theta - pts)
        if np.any(d < cfg.guard_radius):
            bad = theta[d < cfg.guard_radius][0]
            raise NearSingularity(f"theta = {bad} lies within {cfg.guard_radius} of the pole/zero lattice")


def h_pm(sign: int, theta, params: ThermalParams, cfg: QuadratureConfig | None = None):
    """Thermal factors ``h_+(theta)`` and ``h_-(theta)``.

    Defined for ``|Im theta| <= pi``. On the real line the contour
    prescription is realised as principal value plus half residue. Off the
    real line the integration contour is moved to the horizontal line that
    stays farthest from every singularity, which is exact by Cauchy's
    theorem. Across the real axis the functional relation
    ``h_+ h_- = 1/(2 pi alpha)`` and ``h_-(theta) = conj(h_+(conj theta))``
    supply the other half strip.
    """
    if sign not in (1, -1):
        raise DomainError("sign must be +1 or -1")
    cfg = _cfg(cfg)
    th = np.atleast_1d(np.asarray(theta, dtype=complex))
    if np.any(np.abs(th.imag) > np.pi + 1e-12):
        raise DomainError("h_pm is implemented for |Im theta| <= pi")
    th = th.copy()
    th.imag = np.clip(th.imag, -np.pi, np.pi)
    out = np.empty(th.shape, dtype=complex)
    upper = th.imag >= 0.0 if sign > 0 else th.imag > 0.0
    if sign > 0:
        if np.any(upper):
            out[upper] = _h_plus_upper(th[upper], params, cfg)
        lower = ~upper
        if np.any(lower):
            z = th[lower]
            _check_lattice(z, -1, params, cfg)
            h_minus = np.conj(_h_plus_upper(np.conj(z), params, cfg))
            out[lower] = 1.0 / (2.0 * np.pi * _alpha(z, params) * h_minus)
    else:
        lower = ~upper
        if np.any(lower):
            out[lower] = np.conj(_h_plus_upper(np.conj(th[lower]), params, cfg))
        if np.any(upper):
            z = th[upper]
            _check_lattice(z, 1, params, cfg)
            out[upper] = 1.0 / (2.0 * np.pi * _alpha(z, params) * _h_plus_upper(z, params, cfg))
    return out if out.size > 1 or np.ndim(theta) > 0 else complex(out[0])


def h_pm_contour(sign: int, theta, params: ThermalParams, offset: float,
                 cfg: QuadratureConfig | None = None):
    """Reference ``h_+-`` for real theta by direct integration on ``Im s = -+offset``.

    Independent of the principal-value code path; any ``0 < offset < pi/2``
    gives the same value.
    """
    cfg = _cfg(cfg)
    if not 0 < offset < 0.5 * np.pi:
        raise DomainError("offset must lie in (0, pi/2)")
    th = np.atleast_1d(np.asarray(theta, dtype=float)).astype(complex)
    c = np.full(th.shape, -sign * offset)
    integral = _contour_integral(th, c, params, cfg)
    out = np.exp(sign * 0.25j * np.pi) / np.sqrt(2 * np.pi) * np.exp(sign * integral / (2j * np.pi))
    return out if out.size > 1 or np.ndim(theta) > 0 else complex(out[0])


# --------------------------------------------------------------------------
# integrated quantities

def log_kernel_moment(power: float, params: ThermalParams, cfg: QuadratureConfig | None = None) -> float:
    """``int exp(power * s) L(s) ds`` over the real line."""
    cfg = _cfg(cfg)
    hi = _extent(params, power)
    lo = -_extent(params, -power)

    def f(s):
        return np.exp(power * s) * thermal_log_kernel(s, params)

    return float(trapezoid_line(f, lo, hi, 0.2, cfg.abs_tol, cfg.rel_tol, cfg.max_levels).value)


def delta_vacuum_energy(params: ThermalParams, cfg: QuadratureConfig | None = None) -> float:
    """``int cosh(theta) L(theta) dtheta`` (no extra prefactor)."""
    cfg = _cfg(cfg)
    width = _extent(params, 1.0)

    def f(s):
        return np.cosh(s) * thermal_log_kernel(s, params)

    return float(trapezoid_line(f, -width, width, 0.2, cfg.abs_tol, cfg.rel_tol, cfg.max_levels).value)


def _sinh_ratio(theta, r):
    """``sinh(theta) / sinh(r cosh(theta))`` without overflow."""
    x = r * np.cosh(theta)
    return 2.0 * np.sinh(theta) * np.exp(-x) / (-np.expm1(-2.0 * x))


def s_T(params: ThermalParams, cfg: QuadratureConfig | None = None) -> float:
    """Thermal expectation value ``s_T`` of the twist field.

    The double rapidity integral is done in ``u = theta1 - theta2`` and
    ``v = theta1 + theta2``; the ``ln coth(u/2)`` singularity at ``u = 0``
    sits at the end point of a tanh-sinh rule.
    """
    cfg = _cfg(cfg)
    r = params.ratio
    th_max = float(np.arccosh(max(1.0, 45.0 / r))) + 1.0
    vmax = 2.0 * th_max

    def inner(u, hv):
        nv = int(np.ceil(vmax / hv))
        v = hv * np.arange(-nv, nv + 1)
        w1 = _sinh_ratio(0.5 * (v[None, :] + u[:, None]), r)
        w2 = _sinh_ratio(0.5 * (v[None, :] - u[:, None]), r)
        return 0.5 * hv * np.sum(w1 * w2, axis=1)

    def outer(u):
        return -np.log(np.tanh(0.5 * u)) * inner(u, 0.05)

    def outer_fine(u):
        return -np.log(np.tanh(0.5 * u)) * inner(u, 0.025)

    coarse = tanh_sinh(outer, 0.0, 2.0 * th_max, cfg.abs_tol, cfg.rel_tol, cfg.max_levels + 1).value
    fine = tanh_sinh(outer_fine, 0.0, 2.0 * th_max, cfg.abs_tol, cfg.rel_tol, cfg.max_levels + 1).value
    if abs(fine - coarse) > max(cfg.abs_tol, 1e-10 * abs(fine)) * 10:
        raise ConvergenceError(f"s_T double integral unstable: {coarse} vs {fine}")
    double = 2.0 * fine / (4.0 * np.pi ** 2)
    prefactor = params.m ** 0.125 * 2.0 ** (1.0 / 12.0) * np.exp(-0.125) * GLAISHER_A ** 1.5
    return float(prefactor * np.exp(0.5 * r * r * double))


def c_mu_coefficients(mu_max: int, params: ThermalParams, cfg: QuadratureConfig | None = None) -> np.ndarray:
    """Coefficients ``c_0..c_mu_max`` of the generating function.

    ``sum_mu c_mu q^mu = exp(-(2i/pi) sum_w q^(2w+1) I_w)`` with
    ``I_w = int exp((2w+1) s) L(s) ds``. The exponential of the power
    series is expanded with the standard recurrence
    ``n C_n = sum_k k s_k C_(n-k)``.
    """
    cfg = _cfg(cfg)
    if mu_max < 0 or mu_max > MU_MAX:
        raise DomainError(f"mu_max must lie in [0, {MU_MAX}]")
    s = np.zeros(mu_max + 1, dtype=complex)
    for k in range(1, mu_max + 1, 2):
        s[k] = -2j / np.pi * log_kernel_moment(float(k), params, cfg)
    c = np.zeros(mu_max + 1, dtype=complex)
    c[0] = 1.0
    for n in range(1, mu_max + 1):
        k = np.arange(1, n + 1)
        c[n] = np.sum(k * s[k] * c[n - k]) / n
    return c
