"""Nested quadrature rules used throughout the package.

Two rules cover every integral in the library:

* ``trapezoid_line`` is the plain trapezoid rule on a finite window of the
  rapidity line. For integrands that are analytic in a strip and decay like
  ``exp(-a cosh s)`` it already has double-exponential convergence, so no
  further change of variables is applied.
* ``tanh_sinh`` handles finite intervals with endpoint singularities.

Both rules refine by step halving, reuse previous nodes and return the
value together with the last difference between levels as an error estimate.
Integrands are vectorised: ``f(nodes)`` must return an array whose last
axis runs over the nodes, so several integrals can share one node set.
"""
from __future__ import annotations

from dataclasses import dataclass
from typing import Callable

import numpy as np
from scipy.special import expit

from .errors import ConvergenceError

__all__ = ["QuadResult", "trapezoid_line", "tanh_sinh", "decay_extent"]

Integrand = Callable[[np.ndarray], np.ndarray]


@dataclass(frozen=True)
class QuadResult:
    value: complex | np.ndarray
    error: float
    levels: int


def _converged(new, old, abs_tol, rel_tol):
    err = np.max(np.abs(np.asarray(new) - np.asarray(old)))
    scale = np.max(np.abs(new)) if np.size(new) else 0.0
    return err, err <= max(abs_tol, rel_tol * scale)


def trapezoid_line(f: Integrand, lo: float, hi: float, h0: float = 0.1,
                   abs_tol: float = 1e-13, rel_tol: float = 1e-12,
                   max_levels: int = 8, min_levels: int = 1,
                   raise_on_fail: bool = True) -> QuadResult:
    """Trapezoid rule on ``[lo, hi]`` with nested step halving.

    The integrand is assumed negligible at both ends of the window; the end
    points get full weight, which is what makes the rule spectrally accurate
    for decaying analytic functions.
    """
    n = max(int(np.ceil((hi - lo) / h0)), 2)
    h = (hi - lo) / n
    nodes = lo + h * np.arange(n + 1)
    total = np.sum(f(nodes), axis=-1)
    value = h * total
    err = np.inf
    for level in range(1, max_levels + 1):
        mids = lo + h * (np.arange(n) + 0.5)
        total = total + np.sum(f(mids), axis=-1)
        h *= 0.5
        n *= 2
        new = h * total
        err, ok = _converged(new, value, abs_tol, rel_tol)
        value = new
        if ok and level >= min_levels:
            return QuadResult(value, float(err), level)
    if raise_on_fail:
        raise ConvergenceError(f"trapezoid rule stalled, last level difference {err:.3e}")
    return QuadResult(value, float(err), max_levels)


def _ts_nodes(t, a, b):
    s = 0.5 * np.pi * np.sinh(t)
    e = expit(2.0 * s)
    x = a + (b - a) * e
    w = (b - a) * 2.0 * e * (1.0 - e) * 0.5 * np.pi * np.cosh(t)
    return x, w


def tanh_sinh(f: Integrand, a: float, b: float, abs_tol: float = 1e-13,
              rel_tol: float = 1e-12, max_levels: int = 9, t_max: float = 4.0,
              min_levels: int = 2, raise_on_fail: bool = True) -> QuadResult:
    """Tanh-sinh quadrature on ``[a, b]``.

    Nodes near ``a`` are computed as ``a + (b - a) * expit(2 s)``, so an
    integrable singularity at the left end point is resolved down to
    distances of order 1e-37 without cancellation.
    """
    h = 0.5
    t = np.arange(-t_max, t_max + 0.5 * h, h)
    x, w = _ts_nodes(t, a, b)
    total = np.sum(f(x) * w, axis=-1)
    value = h * total
    err = np.inf
    for level in range(1, max_levels + 1):
        t = np.arange(-t_max + 0.5 * h, t_max, h)
        x, w = _ts_nodes(t, a, b)
        total = total + np.sum(f(x) * w, axis=-1)
        h *= 0.5
        new = h * total
        err, ok = _converged(new, value, abs_tol, rel_tol)
        value = new
        if ok and level >= min_levels:
            return QuadResult(value, float(err), level)
    if raise_on_fail:
        raise ConvergenceError(f"tanh-sinh stalled, last level difference {err:.3e}")
    return QuadResult(value, float(err), max_levels)


def decay_extent(log_abs: Callable[[np.ndarray], np.ndarray], start: float = 0.0,
                 drop: float = 40.0, step: float = 0.25, limit: float = 60.0) -> float:
    """Smallest ``s >= start`` beyond which ``log_abs`` stays ``drop`` below its peak.

    ``log_abs`` is the log-modulus of an integrand on the positive half line.
    The scan is coarse; callers add a margin of one step.
    """
    s = np.arange(start, start + limit, step)
    vals = log_abs(s)
    peak = np.max(vals)
    above = np.nonzero(vals > peak - drop)[0]
    return float(s[above[-1]] + 2 * step) if above.size else start + step
