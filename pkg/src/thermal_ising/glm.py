"""GLM kernels, the Volterra solver and field reconstruction.

Kernels ``F_j(s, t)``, ``j in {0, -1, -2}``, have three representations:

* ``residue_sum``: for ``s > 2|t|`` a sum of decaying exponentials,
  ``F_j = sum_n A_jn(t) exp(-kappa_n s)`` with ``kappa_n = m cosh(th_n)/2``,
  ``A_jn = c_j(th_n) T w(th_n) / (m cosh th_n) exp(m t sinh th_n)`` and
  ``c_0 = -e^th``, ``c_-1 = i``, ``c_-2 = e^-th``.
* ``direct_quadrature``: the rapidity integral over both half lines of the
  spectral parameter, the ``lambda > 0`` branch on a contour lifted into the
  strip so that it converges absolutely (this yields the principal part of
  ``F_0``, free of the ``delta(s - 2t)`` piece).
* ``bessel_series``: the large-rapidity expansion of the reflection
  coefficient integrated term by term into modified Bessel functions; an
  asymptotic series that is summed to its smallest term.

The GLM pair for each sigma_z eigenvalue ``s = +-1`` decouples into

    -(2s/m) U(y) = F_0(x+y) + int_x^inf [F_0(y+z) U(z) + F_-1(y+z) W(z)] dz
    +(2s/m) W(y) = F_-1(x+y) + int_x^inf [F_-1(y+z) U(z) + F_-2(y+z) W(z)] dz.
"""
from __future__ import annotations

import csv
from dataclasses import dataclass, field
from functools import lru_cache

import numpy as np
from scipy.signal import fftconvolve
from scipy.sparse.linalg import LinearOperator, gmres

from .errors import (BranchAmbiguity, ConvergenceError, DomainError, OscillationBudgetExceeded,
                     SingularMatrix, TruncationError, ValidityError)
from .quadrature import trapezoid_line
from .scattering import reflection_r
from .specfn import (DEFAULT_CFG, QuadratureConfig, ThermalParams, bessel_k, c_mu_coefficients,
                     quantized_rapidity, thermal_weight)

__all__ = [
    "REPRESENTATIONS", "KernelGrid", "VolterraSolution", "NeumannOrders",
    "residue_modes", "kernel_residue_sum", "kernel_direct", "kernel_bessel_series",
    "bessel_series_terms", "bessel_truncation_estimate", "volterra_solve",
    "reconstruct_phi", "phi_derivative_combination", "reconstruct_phi_profile",
    "neumann_orders", "write_kernel_csv",
]

REPRESENTATIONS = ("residue_sum", "direct_quadrature", "bessel_series")
_J_VALUES = (0, -1, -2)


def _check_j(j):
    if j not in _J_VALUES:
        raise DomainError(f"j must be one of {_J_VALUES}, got {j}")


# --------------------------------------------------------------------------
# residue sums

def _auto_nmax(gap: float, params: ThermalParams, drop: float = 40.0, cap: int = 5000) -> int:
    """Smallest ``n_max`` with ``exp(-m cosh(th_n) gap) < e^-drop``."""
    ch = max(1.0, drop / (params.m * gap))
    n = int(np.ceil(params.ratio * np.sinh(np.arccosh(ch)) / (2.0 * np.pi)))
    if n > cap:
        raise ValidityError(f"residue sum needs n_max = {n} > {cap}; too close to the light cone")
    return max(n, 1)


@dataclass(frozen=True)
class ResidueModes:
    """Exponential basis ``F_j(s, t) = sum_n amp[j][n] exp(-kappa[n] s)``."""

    theta: np.ndarray
    kappa: np.ndarray
    amp: dict = field(repr=False)
    t: float = 0.0


def residue_modes(params: ThermalParams, t: float = 0.0, n_max: int = 20,
                  cfg: QuadratureConfig | None = None) -> ResidueModes:
    n = np.arange(-n_max, n_max + 1)
    th = quantized_rapidity(n, params)
    ch = np.cosh(th)
    base = params.T * np.atleast_1d(thermal_weight(th, params, cfg)) / (params.m * ch)
    base = base * np.exp(params.m * t * np.sinh(th))
    amp = {0: -np.exp(th) * base, -1: 1j * base, -2: np.exp(-th) * base}
    return ResidueModes(th, 0.5 * params.m * ch, amp, t)


def kernel_residue_sum(j: int, x, t: float, params: ThermalParams, n_max: int | None = None,
                       derivative: int = 0, cfg: QuadratureConfig | None = None,
                       margin: float = 1e-9):
    """``F_j(x, t)`` (or its ``derivative``-th x-derivative) from the pole sum.

    Valid for ``x > 2|t|``. ``n_max=None`` picks the smallest mode cut-off
    that makes the tail below ``e^-40`` at the smallest ``x``.
    """
    _check_j(j)
    xs = np.atleast_1d(np.asarray(x, dtype=float))
    gap = 0.5 * xs.min() - abs(t)
    if gap <= margin:
        raise ValidityError(f"residue sum needs x > 2|t|, got x = {xs.min()}, t = {t}")
    if n_max is None:
        n_max = _auto_nmax(gap, params)
    modes = residue_modes(params, t, n_max, cfg)
    coef = modes.amp[j] * (-modes.kappa) ** derivative
    out = np.exp(-np.outer(xs, modes.kappa)) @ coef
    return out[0] if np.ndim(x) == 0 else out


# --------------------------------------------------------------------------
# direct quadrature

def _lift(s, t, x, d0):
    """Contour ``theta = s + i delta(s)`` and ``d theta / d s``."""
    sg = np.sign(t - 0.5 * x)
    tn = np.tanh(s)
    delta = d0 * (-sg * (1.0 + tn) + (1.0 - tn)) / 2.0
    ddelta = d0 * (-sg - 1.0) / 2.0 / np.cosh(s) ** 2
    return s + 1j * delta, 1.0 + 1j * ddelta


def kernel_direct(j: int, x: float, t: float, params: ThermalParams,
                  cfg: QuadratureConfig | None = None, window: float = 14.0,
                  lift: float = np.pi / 4, h0: float = 0.1, max_levels: int = 10):
    """``F_j(x, t)`` by direct quadrature of the spectral integral.

    The ``lambda > 0`` half line is taken on ``Im theta = delta(s)``, which
    tends to ``lift`` as ``s -> -inf`` and to ``-+lift`` as ``s -> +inf``
    (sign set by whether ``(x, t)`` is space- or time-like), so both ends
    decay double-exponentially. The ``lambda < 0`` half line decays on the
    real axis. Both are integrated by the trapezoid rule on ``|s| <= window``.
    Returns the principal part for ``j = 0``; undefined on ``x = 2t``.
    """
    _check_j(j)
    cfg = cfg or DEFAULT_CFG
    if x <= 0:
        raise DomainError("x must be positive")
    if abs(x - 2.0 * t) < 1e-12:
        raise ValidityError("the kernel is singular at x = 2t")
    m = params.m

    def pos(s):
        th, dth = _lift(s, t, x, lift)
        ph = np.exp((j + 1) * th + 1j * m * (0.5 * x * np.sinh(th) - t * np.cosh(th)))
        return dth * ph * reflection_r(th, 0.0, params, "positive", cfg)

    def neg(s):
        ph = np.exp((j + 1) * s - 1j * m * (0.5 * x * np.sinh(s) - t * np.cosh(s)))
        return ph * reflection_r(s, 0.0, params, "negative", cfg)

    edge = np.array([-window, window])
    tail = max(np.abs(pos(edge)).max(), np.abs(neg(edge)).max())
    try:
        i_pos = trapezoid_line(pos, -window, window, h0, cfg.abs_tol, cfg.rel_tol, max_levels).value
        i_neg = trapezoid_line(neg, -window, window, h0, cfg.abs_tol, cfg.rel_tol, max_levels).value
    except ConvergenceError as exc:
        raise OscillationBudgetExceeded(str(exc)) from exc
    value = (i_pos + (-1) ** j * i_neg) / (4.0 * np.pi)
    if tail * 2.0 > max(cfg.abs_tol, cfg.rel_tol * abs(value)) * 4.0 * np.pi:
        raise OscillationBudgetExceeded(f"integrand at |s| = {window} is {tail:.3g}; widen the window")
    return complex(value)


# --------------------------------------------------------------------------
# Bessel series

@lru_cache(maxsize=32)
def _c_mu(params: ThermalParams, mu_max: int) -> np.ndarray:
    return c_mu_coefficients(mu_max, params)


def _bessel_terms(j, x, t, params, coeffs, nu, second):
    m = params.m
    sgn = -1.0 if second else 1.0
    P = sgn * 1j * (t - 0.5 * x) + nu / params.T
    Q = sgn * 1j * (t + 0.5 * x) + nu / params.T
    rp, rq = np.sqrt(P), np.sqrt(Q)
    z = m * rp * rq
    mu = np.arange(len(coeffs))
    out = np.array([(rq / rp) ** (1 + j - k) * bessel_k(k - 1 - j, z, mu_max=len(coeffs) + 2)
                    for k in mu])
    pre = 1j / np.pi * (-1.0 if second and j % 2 else 1.0)
    return pre * np.asarray(coeffs) * out


def bessel_series_terms(j: int, x: float, t: float, params: ThermalParams, mu_max: int = 12,
                        nu: int = 0, second: bool = False, coeffs=None) -> np.ndarray:
    """Individual terms of the Bessel expansion at fixed ``nu``.

    The first series uses ``P = i(t - x/2) + nu/T``, ``Q = i(t + x/2) + nu/T``
    and ``(i/pi) c (sqrt Q / sqrt P)^(1+j-mu) K_(mu-1-j)(m sqrt P sqrt Q)``
    with separate principal roots. The second series flips the sign of the
    imaginary parts and carries an extra ``(-1)^j``. Coefficients default
    to the ``nu = 0`` values ``c_mu`` (first series) or to unit weights.
    """
    _check_j(j)
    if coeffs is None:
        coeffs = _c_mu(params, mu_max) if (nu == 0 and not second) else np.ones(mu_max + 1)
    return _bessel_terms(j, x, t, params, coeffs, nu, second)


def _optimal_cut(terms, mu_cap):
    # stop before the smallest term, but always keep the leading one
    a = np.abs(terms[:mu_cap + 1])
    return max(1, int(np.argmin(a)))


def bessel_truncation_estimate(j: int, x: float, t: float, params: ThermalParams,
                               mu_max: int = 12, mu_cap: int = 7) -> float:
    """Smallest retained-candidate term plus the leading ``nu = 1`` terms.

    The ``nu = 1`` terms of both series are taken with unit coefficients,
    the size of ``r/(2i)`` and ``r(theta + i pi)/(2i)`` at order ``e^{-E/T}``.
    """
    terms = bessel_series_terms(j, x, t, params, mu_max)
    k = _optimal_cut(terms, min(mu_cap, mu_max))
    nu1 = abs(bessel_series_terms(j, x, t, params, 0, nu=1)[0])
    nu1b = abs(bessel_series_terms(j, x, t, params, 0, nu=1, second=True)[0])
    return float(abs(terms[k]) + nu1 + nu1b)


def kernel_bessel_series(j: int, x: float, t: float, params: ThermalParams, mu_max: int = 12,
                         include_nu: bool = False, nu_max: int = 2, truncation: str = "optimal",
                         mu_cap: int = 7, tol: float | None = None) -> complex:
    """``F_j(x, t)`` from the Bessel expansion of the reflection coefficient.

    ``truncation='optimal'`` stops before the smallest term among
    ``mu <= mu_cap`` (the leading term is always kept); ``'fixed'`` keeps every ``mu <= mu_max``. With
    ``include_nu`` the ``1 <= nu <= nu_max`` terms of both series are added
    using ``c_mu_nu = (-1)^nu c_mu`` and ``c~_mu_nu = (-1)^nu conj(c_mu)``,
    the factorised form of the large-rapidity expansion. ``tol`` turns the
    truncation estimate into a hard check.
    """
    _check_j(j)
    if truncation not in ("optimal", "fixed"):
        raise DomainError(f"unknown truncation {truncation!r}")
    if x == 0 and t == 0:
        raise DomainError("the series is singular at the origin")
    c = _c_mu(params, mu_max)
    terms = bessel_series_terms(j, x, t, params, mu_max)
    k = _optimal_cut(terms, min(mu_cap, mu_max)) if truncation == "optimal" else mu_max + 1
    value = terms[:k].sum()
    if include_nu:
        for nu in range(1, nu_max + 1):
            sgn = (-1.0) ** nu
            value += bessel_series_terms(j, x, t, params, mu_max, nu, False, sgn * c)[:k].sum()
            value += bessel_series_terms(j, x, t, params, mu_max, nu, True, sgn * np.conj(c))[:k].sum()
    if tol is not None:
        est = bessel_truncation_estimate(j, x, t, params, mu_max, mu_cap)
        if est > tol:
            raise ValidityError(f"series truncation estimate {est:.3g} exceeds {tol:g}")
    return complex(value)


# --------------------------------------------------------------------------
# kernel tables

@dataclass
class KernelGrid:
    j: int
    t: float
    x_values: np.ndarray
    values: np.ndarray
    representation: str
    valid: np.ndarray

    @classmethod
    def build(cls, j: int, t: float, x_values, params: ThermalParams,
              representation: str = "residue_sum", **kw) -> "KernelGrid":
        _check_j(j)
        if representation not in REPRESENTATIONS:
            raise DomainError(f"unknown representation {representation!r}")
        xs = np.atleast_1d(np.asarray(x_values, dtype=float))
        vals = np.full(xs.shape, np.nan + 0j)
        ok = np.ones(xs.shape, dtype=bool)
        for i, x in enumerate(xs):
            try:
                if representation == "residue_sum":
                    vals[i] = kernel_residue_sum(j, x, t, params, **kw)
                elif representation == "direct_quadrature":
                    vals[i] = kernel_direct(j, x, t, params, **kw)
                else:
                    vals[i] = kernel_bessel_series(j, x, t, params, **kw)
            except ValidityError:
                ok[i] = False
        return cls(j, t, xs, vals, representation, ok)

    def rows(self):
        for x, v, ok in zip(self.x_values, self.values, self.valid):
            yield {"j": self.j, "x": float(x), "t": self.t, "re": float(v.real) if ok else float("nan"),
                   "im": float(v.imag) if ok else float("nan"), "representation": self.representation}


def write_kernel_csv(grids, path) -> None:
    """Write kernel tables with columns ``j, x, t, re, im, representation``."""
    with open(path, "w", newline="") as fh:
        w = csv.DictWriter(fh, fieldnames=["j", "x", "t", "re", "im", "representation"])
        w.writeheader()
        for g in grids:
            for row in g.rows():
                w.writerow({k: (repr(v) if isinstance(v, float) else v) for k, v in row.items()})


# --------------------------------------------------------------------------
# Volterra solver

@dataclass
class VolterraSolution:
    """Kernels on ``y in [x, x + L]``; component 0 is ``+``, component 1 is ``-``.

    ``dxU1``/``dyU1`` hold ``d_x U1(x, y)`` and ``d_y U1(x, y)`` at ``y = x``.
    """

    x: float
    t: float
    y_grid: np.ndarray
    U1: np.ndarray
    W1: np.ndarray
    L: float
    dxU1: np.ndarray
    dyU1: np.ndarray
    residual: float = 0.0
    method: str = "nystrom"
    iterations: int = 0


def _trap_weights(n, h):
    w = np.full(n, h)
    w[0] = w[-1] = 0.5 * h
    return w


class _Hankel:
    """``v -> sum_k f[i + k] w_k v_k`` for ``i, k = 0..N``."""

    def __init__(self, f, w):
        self.f = f
        self.w = w
        self.n = w.size

    def __call__(self, v):
        c = fftconvolve(self.f, (self.w * v)[::-1])
        return c[self.n - 1:2 * self.n - 1]


def _default_L(x, t, params, floor=30.0, tol=1e-11):
    modes = residue_modes(params, t, 0)
    amp = max(abs(modes.amp[j][0]) for j in _J_VALUES)
    k = modes.kappa[0]
    L = (np.log(amp / tol) / k - 2.0 * x) if amp > tol else 0.0
    return max(floor / params.m, float(np.ceil(L)))


def _solve_component(sgn, ops, rhs, m, tol, maxiter):
    n = rhs[0].size
    c = 2.0 * sgn / m

    def mv(v):
        u, w = v[:n], v[n:]
        return np.concatenate([-c * u - ops[0](u) - ops[1](w), c * w - ops[1](u) - ops[2](w)])

    A = LinearOperator((2 * n, 2 * n), matvec=mv, dtype=complex)
    b = np.concatenate(rhs)
    its = [0]

    def cb(_):
        its[0] += 1

    sol, info = gmres(A, b, rtol=tol, atol=0.0, restart=60, maxiter=maxiter,
                      callback=cb, callback_type="pr_norm")
    if info != 0:
        raise SingularMatrix(f"GMRES did not converge (info = {info}); operator may be near singular")
    res = np.linalg.norm(mv(sol) - b) / max(np.linalg.norm(b), 1e-300)
    return sol[:n], sol[n:], float(res), its[0]


def volterra_solve(x: float, t: float, params: ThermalParams, L: float | None = None,
                   h: float | None = None, n_max: int | None = None, method: str = "nystrom",
                   tol: float = 1e-13, maxiter: int = 50,
                   cfg: QuadratureConfig | None = None) -> VolterraSolution:
    """Solve the GLM pair on ``y in [x, x + L]`` for ``0 <= |t| < x``.

    ``method='nystrom'`` uses the product trapezoid rule on a uniform mesh
    ``h`` with FFT Hankel products inside GMRES. ``method='degenerate'``
    solves exactly in the exponential basis of the residue sums (same
    ``n_max`` as the kernels) and samples the result on the mesh.
    ``d_x U1`` at ``y = x`` comes from a second solve with the same operator;
    ``d_y U1`` from the equation itself with differentiated kernels.
    """
    if x <= 0 or abs(t) >= x:
        raise ValidityError("volterra_solve needs the space-like domain 0 <= |t| < x")
    m = params.m
    h = 0.01 / m if h is None else h
    L = _default_L(x, t, params) if L is None else L
    if n_max is None:
        n_max = _auto_nmax(x - abs(t), params)
    modes = residue_modes(params, t, n_max, cfg)
    edge = max(abs(np.exp(-modes.kappa * (2.0 * x + L)) @ modes.amp[j]) for j in _J_VALUES)
    if edge > 1e-10:
        raise TruncationError(f"kernel at y = x + L is {edge:.3g} > 1e-10; increase L")
    N = int(round(L / h))
    y = x + h * np.arange(N + 1)
    if method == "degenerate":
        return _degenerate_solve(x, t, params, modes, y, L)
    if method != "nystrom":
        raise DomainError(f"unknown method {method!r}")
    s = 2.0 * x + h * np.arange(2 * N + 1)
    E = np.exp(-np.outer(s, modes.kappa))
    f = {j: E @ modes.amp[j] for j in _J_VALUES}
    fp = {j: E @ (-modes.kappa * modes.amp[j]) for j in _J_VALUES}
    w = _trap_weights(N + 1, h)
    ops = [_Hankel(f[0], w), _Hankel(f[-1], w), _Hankel(f[-2], w)]
    dops = [_Hankel(fp[0], w), _Hankel(fp[-1], w)]
    U = np.empty((N + 1, 2), dtype=complex)
    W = np.empty((N + 1, 2), dtype=complex)
    dxU = np.empty(2, dtype=complex)
    dyU = np.empty(2, dtype=complex)
    res, its = 0.0, 0
    for col, sgn in enumerate((1.0, -1.0)):
        u, v, r1, n1 = _solve_component(sgn, ops, [f[0][:N + 1], f[-1][:N + 1]], m, tol, maxiter)
        drhs = [fp[0][:N + 1] - f[0][:N + 1] * u[0] - f[-1][:N + 1] * v[0],
                fp[-1][:N + 1] - f[-1][:N + 1] * u[0] - f[-2][:N + 1] * v[0]]
        du, _, r2, n2 = _solve_component(sgn, ops, drhs, m, tol, maxiter)
        U[:, col], W[:, col] = u, v
        dxU[col] = du[0]
        dyU[col] = -m / (2.0 * sgn) * (fp[0][0] + dops[0](u)[0] + dops[1](v)[0])
        res = max(res, r1, r2)
        its += n1 + n2
    return VolterraSolution(x, t, y, U, W, L, dxU, dyU, res, "nystrom", its)


def _degenerate_system(x, modes, m, sgn, ep=1.0):
    """Coefficient system for ``U = sum u_n e^{-kappa_n y}``, ``W = sum w_n e^{-kappa_n y}``."""
    k = modes.kappa
    ks = k[:, None] + k[None, :]
    G = np.exp(-ks * x) / ks
    dG = -np.exp(-ks * x)
    a0, a1, a2 = (ep * modes.amp[j] for j in _J_VALUES)
    c = 2.0 * sgn / m
    n = k.size
    eye = np.eye(n)
    M = np.block([[-c * eye - a0[:, None] * G, -a1[:, None] * G],
                  [-a1[:, None] * G, c * eye - a2[:, None] * G]])
    dM = -np.block([[a0[:, None] * dG, a1[:, None] * dG], [a1[:, None] * dG, a2[:, None] * dG]])
    e = np.exp(-k * x)
    b = np.concatenate([a0 * e, a1 * e])
    db = np.concatenate([-k * a0 * e, -k * a1 * e])
    return M, dM, b, db


def _degenerate_solve(x, t, params, modes, y, L):
    m = params.m
    k = modes.kappa
    n = k.size
    Ey = np.exp(-np.outer(y, k))
    U = np.empty((y.size, 2), dtype=complex)
    W = np.empty((y.size, 2), dtype=complex)
    dxU = np.empty(2, dtype=complex)
    dyU = np.empty(2, dtype=complex)
    res = 0.0
    for col, sgn in enumerate((1.0, -1.0)):
        M, dM, b, db = _degenerate_system(x, modes, m, sgn)
        cond = np.linalg.cond(M)
        if not np.isfinite(cond) or cond > 1e12:
            raise SingularMatrix(f"degenerate GLM system has condition number {cond:.3g}")
        coef = np.linalg.solve(M, b)
        dcoef = np.linalg.solve(M, db - dM @ coef)
        res = max(res, float(np.linalg.norm(M @ coef - b) / np.linalg.norm(b)))
        u, w = coef[:n], coef[n:]
        du = dcoef[:n]
        U[:, col], W[:, col] = Ey @ u, Ey @ w
        ex = np.exp(-k * x)
        dxU[col] = ex @ du
        dyU[col] = ex @ (-k * u)
    return VolterraSolution(x, t, y, U, W, L, dxU, dyU, res, "degenerate", 0)


# --------------------------------------------------------------------------
# reconstruction

def _exp_two_phi(U, W, dxU, dyU, m):
    """``e^{2 phi}`` from the kernels at ``y = x`` (component 0 is ``+``)."""
    return (1.0 + 4j / m * (W[1] - W[0]) + 16.0 / m ** 2 * (U[1] - U[0]) * U[0]
            - 16.0 / m ** 2 * (dxU[0] + dyU[1]))


def reconstruct_phi(sol: VolterraSolution, params: ThermalParams, branch: int = 0):
    """``phi = ln(e^{2 phi}) / 2`` on the given branch of the logarithm.

    Real for ``t = 0`` when the solution is consistent.
    """
    e2 = _exp_two_phi(sol.U1[0], sol.W1[0], sol.dxU1, sol.dyU1, params.m)
    val = 0.5 * (np.log(complex(e2)) + 2j * np.pi * branch)
    return float(val.real) if sol.t == 0 and abs(val.imag) < 1e-12 else complex(val)


def phi_derivative_combination(sol: VolterraSolution) -> complex:
    """``(d_t - d_x) phi = 2 (U1+ - U1-)`` at ``y = x``."""
    return complex(2.0 * (sol.U1[0, 0] - sol.U1[0, 1]))


def reconstruct_phi_profile(xs, t: float, params: ThermalParams, **solve_kw) -> np.ndarray:
    """``phi`` on a grid of base points with the logarithm branch continued.

    The branch is anchored at the largest ``x`` (where ``e^{2 phi}`` must be
    close to 1) and continued inward by nearest-branch selection.
    """
    xs = np.asarray(xs, dtype=float)
    order = np.argsort(xs)[::-1]
    out = np.empty(xs.size, dtype=complex)
    prev = None
    for i in order:
        sol = volterra_solve(xs[i], t, params, **solve_kw)
        e2 = complex(_exp_two_phi(sol.U1[0], sol.W1[0], sol.dxU1, sol.dyU1, params.m))
        if prev is None:
            if abs(e2 - 1.0) > 0.5:
                raise BranchAmbiguity(f"|e^(2 phi) - 1| = {abs(e2 - 1.0):.3g} at the anchor x = {xs[i]}")
            val = 0.5 * np.log(e2)
        else:
            base = 0.5 * np.log(e2)
            k = np.round((prev - base).imag / np.pi)
            val = base + 1j * np.pi * k
        out[i] = val
        prev = val
    return out.real if (t == 0 and np.all(np.abs(out.imag) < 1e-12)) else out


# --------------------------------------------------------------------------
# Neumann orders

@dataclass
class NeumannOrders:
    x: float
    glm: np.ndarray              # 1_GLM, 2_GLM, ... (index 0 is order 1)
    phi_orders: np.ndarray       # order-by-order contributions to phi
    second_identity: float       # 2_GLM/2 - 1_GLM^2/4
    U_orders: np.ndarray = field(repr=False, default=None)


def _neumann_coefficients(x, modes, m, sgn, order):
    """Order-by-order coefficient vectors and their x-derivatives."""
    M, dM, b, db = _degenerate_system(x, modes, m, sgn)
    n2 = b.size
    c = 2.0 * sgn / m
    D = np.concatenate([np.full(n2 // 2, -c), np.full(n2 // 2, c)])
    K = M - np.diag(D)          # integral part, -F G blocks
    dK = dM
    coefs, dcoefs = [b / D], [db / D]
    for _ in range(order - 1):
        prev, dprev = coefs[-1], dcoefs[-1]
        coefs.append(-(K @ prev) / D)
        dcoefs.append(-(dK @ prev + K @ dprev) / D)
    return coefs, dcoefs


def neumann_orders(x: float, params: ThermalParams, order: int = 3, n_max: int = 20,
                   t: float = 0.0, cfg: QuadratureConfig | None = None) -> NeumannOrders:
    """Expansion of ``e^{2 phi}`` in powers of the kernels.

    The Neumann iterates are exact in the exponential basis, so the
    groupings ``k_GLM`` carry no discretisation error.
    """
    if order not in (1, 2, 3):
        raise DomainError("order must be 1, 2 or 3")
    m = params.m
    modes = residue_modes(params, t, n_max, cfg)
    k = modes.kappa
    n = k.size
    ex = np.exp(-k * x)
    U = np.zeros((order, 2), dtype=complex)
    W = np.zeros((order, 2), dtype=complex)
    dxU = np.zeros((order, 2), dtype=complex)
    dyU = np.zeros((order, 2), dtype=complex)
    for col, sgn in enumerate((1.0, -1.0)):
        coefs, dcoefs = _neumann_coefficients(x, modes, m, sgn, order)
        for o in range(order):
            u, w = coefs[o][:n], coefs[o][n:]
            U[o, col] = ex @ u
            W[o, col] = ex @ w
            dxU[o, col] = ex @ dcoefs[o][:n]
            dyU[o, col] = ex @ (-k * u)
    glm = np.zeros(order, dtype=complex)
    for o in range(order):
        glm[o] = 4j / m * (W[o, 1] - W[o, 0]) - 16.0 / m ** 2 * (dxU[o, 0] + dyU[o, 1])
        for a in range(o):
            glm[o] += 16.0 / m ** 2 * (U[a, 1] - U[a, 0]) * U[o - 1 - a, 0]
    g = np.real_if_close(glm, tol=1e6)
    phi = [g[0] / 2]
    if order >= 2:
        phi.append(g[1] / 2 - g[0] ** 2 / 4)
    if order >= 3:
        phi.append(g[2] / 2 - g[0] * g[1] / 2 + g[0] ** 3 / 6)
    second = float(abs(phi[1])) if order >= 2 else float("nan")
    return NeumannOrders(x, np.asarray(g), np.asarray(phi), second, U)
