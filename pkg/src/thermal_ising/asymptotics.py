"""Near-light-cone expansions at large ``w = t + x`` with ``v = t - x`` fixed.

The linearised field is the Klein-Gordon superposition

    phi(v, w) = (2/pi) sum_mu c_mu (v/w)^(mu/2) K_mu(i m sqrt(v w)),

which equals ``-2i`` times the leading Bessel series of ``F_-1(2x, t)``.
Space-like points (``v < 0``) are reached through the lower half ``v``
plane, i.e. ``sqrt(v) = -i sqrt|v|``, so the Bessel argument becomes real and
the series decays like ``exp(-m sqrt(|v| w))``.

Large-argument expansion gives

    phi   = sqrt(-2i/(pi m)) (vw)^(-1/4) e^{-i m r} (1 + sum_k g_k / (m r)^k),
    chi~  = (i / (2 pi m r)) e^{-2 i m r} (1 + sum_k f_k / (m r)^k),

with ``r = sqrt(v w)`` and ``g_k``, ``f_k`` polynomials in ``m v``.
"""
from __future__ import annotations

import warnings
from dataclasses import dataclass
from math import factorial

import numpy as np
from scipy.integrate import quad_vec

from .errors import BranchError, DomainError, RegimeWarning, SingularMatrix
from .glm import bessel_series_terms, kernel_bessel_series
from .scattering import reflection_r
from .specfn import ThermalParams, bessel_k, c_mu_coefficients, s_T

__all__ = [
    "LightconeCoords", "SeriesCoefficients", "phi_lightcone", "phi_from_kernel",
    "series_coefficients", "g_oracle", "phi_series", "chi_series", "g_bracket_terms",
    "correlators_lightcone", "klein_gordon_check", "chi_equation_residual",
    "AnsatzSystemResult", "ansatz_matrix", "verify_ansatz_system", "verify_appendixC_system",
    "XiReport", "xi_solution_check", "xi_two_scale", "delta_weights",
]

_FD = np.array([1.0, -8.0, 0.0, 8.0, -1.0]) / 12.0


@dataclass(frozen=True)
class LightconeCoords:
    """``v = t - x``, ``w = t + x``."""

    v: float
    w: float

    def __post_init__(self):
        if not self.w > 0:
            raise DomainError("w must be positive")
        if self.v == 0:
            raise BranchError("v = 0 lies on the light cone")

    @classmethod
    def from_xt(cls, x: float, t: float) -> "LightconeCoords":
        return cls(float(t - x), float(t + x))

    @property
    def x(self) -> float:
        return 0.5 * (self.w - self.v)

    @property
    def t(self) -> float:
        return 0.5 * (self.w + self.v)

    @property
    def regime(self) -> str:
        return "time-like" if self.v > 0 else "space-like"

    @property
    def sqrt_v(self) -> complex:
        """``sqrt(v)`` with ``v = |v| e^{-i pi}`` on the space-like side."""
        r = np.sqrt(abs(self.v))
        return complex(r) if self.v > 0 else -1j * r

    @property
    def root(self) -> complex:
        """``sqrt(v w)`` on the same branch."""
        return self.sqrt_v * np.sqrt(self.w)

    def check_regime(self, params: ThermalParams):
        scale = 5.0 * max(abs(self.v), 1.0 / params.m, 1.0 / params.T)
        if self.w < scale:
            warnings.warn(f"w = {self.w:g} is not large against {scale:g}", RegimeWarning,
                          stacklevel=3)


def _c(params: ThermalParams | None, mu_max: int) -> np.ndarray:
    if params is None:  # zero temperature
        c = np.zeros(mu_max + 1, dtype=complex)
        c[0] = 1.0
        return c
    return c_mu_coefficients(mu_max, params)


def _phi_terms(coords: LightconeCoords, m: float, c: np.ndarray) -> np.ndarray:
    ratio = coords.sqrt_v / np.sqrt(coords.w)
    z = 1j * m * coords.root
    return np.array([2.0 / np.pi * c[k] * ratio ** k * bessel_k(k, z, mu_max=len(c))
                     for k in range(len(c))])


def phi_lightcone(coords: LightconeCoords, params: ThermalParams, mu_max: int = 3,
                  truncation: str = "fixed", mu_cap: int = 7) -> complex:
    """Linearised ``phi`` from the Bessel superposition.

    ``truncation='fixed'`` keeps ``mu <= mu_max``; ``'optimal'`` stops before
    the smallest term among ``mu <= mu_cap``, the same rule as the kernel series.
    """
    coords.check_regime(params)
    if truncation == "fixed":
        return complex(_phi_terms(coords, params.m, _c(params, mu_max)).sum())
    if truncation != "optimal":
        raise DomainError(f"unknown truncation {truncation!r}")
    terms = _phi_terms(coords, params.m, _c(params, mu_cap))
    return complex(terms[:max(1, int(np.argmin(np.abs(terms))))].sum())


def phi_from_kernel(coords: LightconeCoords, params: ThermalParams, mu_max: int = 3,
                    truncation: str = "fixed", mu_cap: int = 7) -> complex:
    """``-2i F_-1(2x, t)`` from the kernel's Bessel series at the same truncation."""
    top = max(mu_max, mu_cap) if truncation == "optimal" else mu_max
    F = kernel_bessel_series(-1, 2.0 * coords.x, coords.t, params, mu_max=top,
                             truncation=truncation, mu_cap=mu_cap)
    return -2j * F


# --------------------------------------------------------------------------
# large-argument coefficients

def _poly(*coefs) -> np.ndarray:
    return np.array(coefs, dtype=complex)


@dataclass(frozen=True)
class SeriesCoefficients:
    """``c_mu`` and the polynomials ``g_k``, ``f_k`` in ``m v`` (ascending powers)."""

    c: np.ndarray
    g: tuple
    f: tuple

    def g_value(self, k: int, mv):
        return np.polynomial.polynomial.polyval(mv, self.g[k - 1])

    def f_value(self, k: int, mv):
        return np.polynomial.polynomial.polyval(mv, self.f[k - 1])


def series_coefficients(params: ThermalParams | None) -> SeriesCoefficients:
    """Polynomials ``g_1..g_3`` and ``f_1..f_3``; ``params=None`` means ``T = 0``."""
    c = _c(params, 3)
    c1, c2, c3 = c[1], c[2], c[3]
    g = (
        _poly(1j / 8, c1),
        _poly(-9 / 128, -3j * c1 / 8, c2),
        _poly(-75j / 1024, 15 * c1 / 128, -15j * c2 / 8, c3),
    )
    f = (
        _poly(3j / 4, 2 * c1),
        _poly(-33 / 32, 1j * c1 / 2, 2 * c2 + c1 ** 2),
        _poly(-255j / 128, -9 * c1 / 16, -0.25j * (c1 ** 2 + 10 * c2), 2 * (c1 * c2 + c3)),
    )
    return SeriesCoefficients(c, g, f)


def _hankel_a(k: int, mu: int) -> float:
    num = np.prod([4 * mu * mu - (2 * j - 1) ** 2 for j in range(1, k + 1)])
    return float(num) / (factorial(k) * 8.0 ** k)


def g_oracle(k: int, c: np.ndarray, mv) -> complex:
    """``g_k`` from the large-argument series of ``K_mu``, term by term."""
    return sum(c[mu] * mv ** mu * _hankel_a(k - mu, mu) / 1j ** (k - mu) for mu in range(k + 1))


def phi_series(v, w, m: float, coefs: SeriesCoefficients, order: int = 3):
    r = np.sqrt(v * w)
    s = 1.0 + sum(coefs.g_value(k, m * v) / (m * r) ** k for k in range(1, order + 1))
    return np.sqrt(-2j / (np.pi * m)) * (v * w) ** -0.25 * np.exp(-1j * m * r) * s


def chi_series(v, w, m: float, coefs: SeriesCoefficients, order: int = 3):
    r = np.sqrt(v * w)
    s = 1.0 + sum(coefs.f_value(k, m * v) / (m * r) ** k for k in range(1, order + 1))
    return 1j / (2.0 * np.pi * m * r) * np.exp(-2j * m * r) * s


def g_bracket_terms(coords: LightconeCoords, m: float, c: np.ndarray) -> np.ndarray:
    """The three printed corrections inside the bracket of ``G``.

    The oscillating factor ``exp(-2i m sqrt(vw))`` is not included. The
    first term carries no ``c_mu``.
    """
    r = coords.root
    mv = m * coords.v
    c1, c2 = c[1], c[2]
    return np.array([
        -1.0 / (8 * np.pi * m ** 2 * r ** 2),
        -(7j + 8 * c1 * mv) / (32 * np.pi * m ** 3 * r ** 3),
        (117 - 48j * c1 * mv - 32 * (c1 ** 2 + 2 * c2) * mv ** 2) / (256 * np.pi * m ** 4 * r ** 4),
    ])


def correlators_lightcone(coords: LightconeCoords, params: ThermalParams,
                          abc: tuple[float, float, float] = (0.0, 0.0, 0.0),
                          mu_max: int = 3) -> tuple[complex, complex]:
    """``(G, G~)`` near the light cone; ``A, B, C`` are supplied by the caller."""
    coords.check_regime(params)
    A, B, C = abc
    pre = s_T(params) ** 2 * np.exp(-A - B * coords.x - C * coords.t)
    c = _c(params, 3)
    osc = np.exp(-2j * params.m * coords.root)
    G = pre * (1.0 + osc * g_bracket_terms(coords, params.m, c).sum())
    phi = phi_lightcone(coords, params, mu_max)
    return complex(G), complex(pre * 0.5 * phi)


# --------------------------------------------------------------------------
# PDE checks

def _mixed(F, v, w, h):
    tot = 0.0
    for i, a in enumerate(_FD):
        for j, b in enumerate(_FD):
            if a and b:
                tot = tot + a * b * F(v + (i - 2) * h, w + (j - 2) * h)
    return tot / (h * h)


def klein_gordon_check(mu: int, v: float, w: float, m: float = 1.0, h: float = 1e-3) -> float:
    """Relative residual of ``d_v d_w Phi_mu + (m^2/4) Phi_mu`` by a 4th-order stencil.

    ``Phi_mu = (v/w)^(mu/2) K_mu(i m sqrt(vw))`` at a time-like point.
    """
    if v <= 4 * h or w <= 4 * h:
        raise DomainError("stencil must stay inside v, w > 0")

    def Phi(a, b):
        return (a / b) ** (0.5 * mu) * bessel_k(mu, 1j * m * np.sqrt(a * b))

    val = Phi(v, w)
    return float(abs(_mixed(Phi, v, w, h) + 0.25 * m * m * val) / abs(0.25 * m * m * val))


def chi_equation_residual(v: float, w: float, params: ThermalParams | None, order: int = 3,
                          h: float = 2e-3) -> float:
    """Relative residual of ``d_v d_w chi~ = (m^2/4) phi^2`` with both series cut at ``order``.

    It falls off like ``w^{-(order+1)/2}`` when the ``f_k`` are consistent
    with the ``g_k``.
    """
    m = params.m if params is not None else 1.0
    coefs = series_coefficients(params)
    lhs = _mixed(lambda a, b: chi_series(a, b, m, coefs, order), v, w, h)
    rhs = 0.25 * m * m * phi_series(v, w, m, coefs, order) ** 2
    return float(abs(lhs - rhs) / abs(rhs))


# --------------------------------------------------------------------------
# ansatz linear system

def ansatz_matrix(K: complex, Kt: complex, s: int) -> np.ndarray:
    """8x8 matrix of the ansatz system on the ``sigma_z = s`` eigenspace."""
    I = 1j
    return np.array([
        [0.5, -I * s - s * Kt / 4, -I * s / 2 - s * K / 4, 0, 0, s * Kt / 4, s * K / 4, 0],
        [-I * s / 2, I * Kt / 4, -0.5 + I * K / 4, 0, 0, -I * Kt / 4, -I * K / 4, 0],
        [s * K / 4, 0, 0.5, -I * s / 2 + s * Kt / 4, 0, 0, 0, 0],
        [-I * K / 4, 0, -I * s / 2, 0.5 - I * Kt / 4, 0, 0, 0, 0],
        [0, -I * s - s * Kt / 2, -I * s - s * K / 2, 0, 1, s * Kt / 2, s * K / 2, 0],
        [0, 0, 0, 0, 0, 1, 0, 0],
        [s * K / 2, 0, 0, s * Kt / 2, 0, 0, 1, 0],
        [0, 0, 0, 0, 0, 0, 0, 1],
    ], dtype=complex)


def _ansatz_rhs(s: int, m: float) -> np.ndarray:
    return m * np.array([0.25j, s / 4, -s / 4, 0.25j, 0.5j, 0, -s / 2, 0], dtype=complex)


@dataclass
class AnsatzSystemResult:
    """Solutions for ``sigma_z = +1`` and ``-1`` (coefficients ordered alpha..delta')."""

    solution: dict
    expected: dict
    residual: float
    deviation: float

    @property
    def passed(self) -> bool:
        return self.deviation < 1e-12 and self.residual < 1e-12


def verify_ansatz_system(K: complex, Kt: complex, m: float = 1.0,
                         cond_max: float = 1e12) -> AnsatzSystemResult:
    """Solve the ansatz system; the expected solution has ``gamma = gamma' = -m s/2`` only."""
    sol, exp = {}, {}
    res = dev = 0.0
    for s in (1, -1):
        M = ansatz_matrix(K, Kt, s)
        if np.linalg.cond(M) > cond_max:
            raise SingularMatrix(f"ansatz matrix is singular for K = {K}, K~ = {Kt}")
        b = _ansatz_rhs(s, m)
        x = np.linalg.solve(M, b)
        e = np.zeros(8, dtype=complex)
        e[2] = e[6] = -0.5 * m * s
        sol[s], exp[s] = x, e
        res = max(res, float(np.max(np.abs(M @ x - b))))
        dev = max(dev, float(np.max(np.abs(x - e))))
    return AnsatzSystemResult(sol, exp, res, dev)


verify_appendixC_system = verify_ansatz_system


# --------------------------------------------------------------------------
# time-like GLM candidate

def delta_weights(params: ThermalParams, theta_large: float = 20.0) -> dict:
    """Coefficients of ``delta(x - 2t)`` in ``F_0`` and in ``U_1`` on both eigenspaces.

    The head of ``r`` at large rapidity is ``2i``; the transform turns it into
    ``r_head / m`` in ``F_0``, and ``U_1 = -(m/2) sigma_z F_0 (1, 1)`` then
    carries ``(-i, i)``.
    """
    head = complex(reflection_r(theta_large, 0.0, params))
    f0 = head / params.m
    return {"r_head": head, "F0": f0,
            "U1": np.array([-0.5 * params.m * s * f0 for s in (1, -1)])}


def _f0_principal(s, t, params, mu_max):
    return bessel_series_terms(0, s, t, params, mu_max).sum()


@dataclass
class XiReport:
    x: float
    y: float
    t: float
    residual: complex
    retained: float
    quad_error: float

    @property
    def relative(self) -> float:
        return abs(self.residual) / self.retained


def xi_solution_check(params: ThermalParams, point: tuple[float, float, float], mu_max: int = 2,
                      lift: float = 1.0, decay: float = 0.5, tail: float = 80.0) -> XiReport:
    """Residual of the time-like GLM equation at ``xi = (m/2) F_0^P(x+y, t)(-1, 1)``.

    With this candidate the delta and principal-value pieces cancel against
    the explicit inhomogeneities, leaving ``(m/2) int F_0(y+z) F_0(x+z) dz``
    along a contour from ``x`` that leaves the real axis into the upper half
    plane. ``retained`` is ``|(m/2) F_0^P(x+y, t)|``.
    """
    x, y, t = map(float, point)
    if not t > x:
        raise DomainError("the check needs a time-like point t > x")
    m = params.m
    U = 2.0 * t + tail / m

    def f(u):
        z = x + u + 1j * lift * (1.0 - np.exp(-u / decay))
        dz = 1.0 + 1j * lift / decay * np.exp(-u / decay)
        return 0.5 * m * _f0_principal(y + z, t, params, mu_max) * \
            _f0_principal(x + z, t, params, mu_max) * dz

    r, err = quad_vec(f, 0.0, U, epsabs=1e-14, epsrel=1e-10, limit=2000)
    keep = abs(0.5 * m * _f0_principal(x + y, t, params, mu_max))
    return XiReport(x, y, t, complex(r), float(keep), float(err))


def xi_two_scale(params: ThermalParams, offsets: tuple[float, float] = (1.0, 1.5),
                 t: float = 10.0, **kw) -> tuple[XiReport, XiReport, bool]:
    """Compare the check at ``t`` and ``2t`` with ``x = t - d``, ``y = t + s``.

    Passes when the residual shrinks by more than the retained term does.
    """
    d, s = offsets
    a = xi_solution_check(params, (t - d, t + s, t), **kw)
    b = xi_solution_check(params, (2 * t - d, 2 * t + s, 2 * t), **kw)
    ok = abs(a.residual) / abs(b.residual) > a.retained / b.retained
    return a, b, bool(ok)
