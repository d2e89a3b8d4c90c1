"""Command-line front end.

Every command writes a table, CSV by default or ``{"meta": ..., "rows": [...]}``
with ``--format json``. Exit codes: 0 success, 2 configuration error,
3 numerical failure. ``THERMAL_ISING_THREADS`` caps the BLAS thread pools.
"""
from __future__ import annotations

import argparse
import csv
import io
import json
import math
import os
import sys
import warnings

import numpy as np
from threadpoolctl import threadpool_limits

from .asymptotics import (LightconeCoords, correlators_lightcone, phi_lightcone,
                          verify_ansatz_system, xi_two_scale)
from .errors import ConvergenceError, DomainError, ThermalIsingError, ValidityError
from .form_factors import (CircleModeSet, TruncationPolicy, correlator_equal_time,
                           phi_equal_time)
from .glm import (REPRESENTATIONS, KernelGrid, reconstruct_phi, volterra_solve)
from .linear_problem import FieldProfile, scatter_check
from .specfn import ThermalParams

EXIT_OK, EXIT_CONFIG, EXIT_NUMERIC = 0, 2, 3


class ConfigError(Exception):
    pass


def parse_range(text: str) -> np.ndarray:
    """``a:b:n`` gives ``n`` points from ``a`` to ``b`` inclusive; a bare number gives one."""
    parts = text.split(":")
    try:
        if len(parts) == 1:
            return np.array([float(parts[0])])
        if len(parts) != 3:
            raise ValueError
        a, b, n = float(parts[0]), float(parts[1]), int(parts[2])
    except ValueError:
        raise ConfigError(f"bad range {text!r}; expected a:b:n") from None
    if n < 1:
        raise ConfigError("a range needs at least one point")
    return np.linspace(a, b, n)


def _num(v):
    if isinstance(v, (np.floating, float)):
        return float(v)
    if isinstance(v, (np.integer, int)) and not isinstance(v, bool):
        return int(v)
    return v


def _fmt(v) -> str:
    v = _num(v)
    if isinstance(v, float):
        return repr(v)
    return str(v)


def emit(meta: dict, rows: list[dict], fmt: str, out) -> None:
    if fmt == "json":
        def clean(v):
            v = _num(v)
            return None if isinstance(v, float) and not math.isfinite(v) else v
        doc = {"meta": meta, "rows": [{k: clean(v) for k, v in r.items()} for r in rows]}
        out.write(json.dumps(doc, indent=1, sort_keys=False) + "\n")
        return
    if not rows:
        return
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(list(rows[0]))
    for r in rows:
        w.writerow([_fmt(v) for v in r.values()])
    out.write(buf.getvalue())


# --------------------------------------------------------------------------
# commands

def cmd_corr(a, params):
    xs, ts = parse_range(a.x), parse_range(a.t)
    rows = []
    policy = TruncationPolicy(a.n_max, *_orders(a.n_particles))
    modes = CircleModeSet(params, policy.n_max) if a.method == "formfactor" else None
    nan = float("nan")
    for t in ts:
        for x in xs:
            row = {"x": x, "t": t, "G_re": nan, "G_im": nan, "Gtilde_re": nan, "Gtilde_im": nan,
                   "phi_re": nan, "phi_im": nan, "method": a.method, "regime": ""}

            def point(x=x, t=t, row=row):
                if a.method == "formfactor":
                    if t != 0:
                        raise ConfigError("the form-factor method is equal-time only (use --t 0)")
                    G = correlator_equal_time(x, params, policy, "sigma", modes)
                    Gt = correlator_equal_time(x, params, policy, "mu", modes)
                    phi = phi_equal_time(x, params, policy, modes)
                    row.update(G_re=G, G_im=0.0, Gtilde_re=Gt, Gtilde_im=0.0, phi_re=phi, phi_im=0.0,
                               regime="space-like")
                elif a.method == "glm":
                    sol = volterra_solve(x, t, params, h=a.h)
                    phi = complex(reconstruct_phi(sol, params))
                    row.update(phi_re=phi.real, phi_im=phi.imag, regime="space-like")
                else:
                    c = LightconeCoords.from_xt(x, t)
                    G, Gt = correlators_lightcone(c, params, mu_max=a.mu_max)
                    phi = phi_lightcone(c, params, a.mu_max)
                    row.update(G_re=G.real, G_im=G.imag, Gtilde_re=Gt.real, Gtilde_im=Gt.imag,
                               phi_re=phi.real, phi_im=phi.imag, regime=c.regime)

            _at_point(point, x, t)
            rows.append(row)
    return rows, EXIT_OK


def _at_point(fn, x, t):
    try:
        return fn()
    except ThermalIsingError as e:
        raise type(e)(f"at x = {x}, t = {t}: {e}") from e


def _orders(n_particles):
    return n_particles - n_particles % 2, n_particles - 1 + n_particles % 2


def cmd_scatter_check(a, params):
    profile = FieldProfile.zero(a.x_min, a.x_max) if a.zero_field else None
    rep = scatter_check(params, a.p_theta, a.n_max, a.n_particles, (a.x_min, a.x_max), a.step,
                     a.tol, profile)
    row = {"theta": rep.theta, "a_num_re": rep.a_num.real, "a_num_im": rep.a_num.imag,
           "a_exact_re": rep.a_exact.real, "a_exact_im": rep.a_exact.imag,
           "b_num_re": rep.b_num.real, "b_num_im": rep.b_num.imag,
           "b_exact_re": rep.b_exact.real, "b_exact_im": rep.b_exact.imag,
           "rel_dev": rep.rel_dev_upper, "rel_dev_a": rep.rel_dev_a, "rel_dev_b": rep.rel_dev_b,
           "step_error": rep.run.step_error, "status": "PASS" if rep.passed else "FAIL"}
    return [row], EXIT_OK


def cmd_kernels(a, params):
    xs = parse_range(a.x)
    reps = a.representation or list(REPRESENTATIONS)
    for r in reps:
        if r not in REPRESENTATIONS:
            raise ConfigError(f"unknown representation {r!r}")
    grids = [KernelGrid.build(a.j, a.t, xs, params, r) for r in reps]
    rows = []
    for i, x in enumerate(xs):
        good = [g.values[i] for g in grids if g.valid[i]]
        dev = float(max(abs(u - v) for u in good for v in good)) if len(good) > 1 else float("nan")
        for g in grids:
            ok = bool(g.valid[i])
            v = g.values[i]
            rows.append({"j": a.j, "x": x, "t": a.t, "re": v.real if ok else float("nan"),
                         "im": v.imag if ok else float("nan"), "representation": g.representation,
                         "valid": ok, "max_deviation": dev})
            if not ok:
                warnings.warn(f"{g.representation} is not valid at x = {x}, t = {a.t}")
    return rows, EXIT_OK


def cmd_glm_solve(a, params):
    sol = volterra_solve(a.x, a.t, params, L=a.L, h=a.h, method=a.method)
    rows = []
    stride = max(1, a.stride)
    for k in range(0, sol.y_grid.size, stride):
        rows.append({"y": sol.y_grid[k],
                     "U1p_re": sol.U1[k, 0].real, "U1p_im": sol.U1[k, 0].imag,
                     "U1m_re": sol.U1[k, 1].real, "U1m_im": sol.U1[k, 1].imag,
                     "W1p_re": sol.W1[k, 0].real, "W1p_im": sol.W1[k, 0].imag,
                     "W1m_re": sol.W1[k, 1].real, "W1m_im": sol.W1[k, 1].imag})
    return rows, EXIT_OK, {"residual": sol.residual, "L": sol.L, "phi": _num_c(reconstruct_phi(sol, params))}


def _num_c(z):
    z = complex(z)
    return [z.real, z.imag]


def cmd_asympt_verify(a, params):
    rng = np.random.default_rng(a.seed)
    rows = []
    for k in range(a.draws):
        K, Kt = rng.normal(size=2) + 1j * rng.normal(size=2)
        if k == 0:
            K = Kt = -1j
        rep = verify_ansatz_system(complex(K), complex(Kt), params.m)
        rows.append({"check": "ansatz_system", "index": k, "value": rep.deviation, "residual": rep.residual,
                     "status": "PASS" if rep.passed else "FAIL"})
    r1, r2, ok = xi_two_scale(params, (a.xi_d, a.xi_s), a.xi_t)
    rows.append({"check": "xi_two_scale", "index": 0,
                 "value": abs(r1.residual) / abs(r2.residual), "residual": r1.retained / r2.retained,
                 "status": "PASS" if ok else "FAIL"})
    return rows, EXIT_OK


# --------------------------------------------------------------------------

def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="thermal-ising", description="Thermal Ising correlator toolkit")
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--m", type=float, default=1.0)
    common.add_argument("--T", type=float, default=1.0)
    common.add_argument("--format", choices=("csv", "json"), default="csv")
    common.add_argument("--output", default="-")
    common.add_argument("--seed", type=int, default=0)
    sub = p.add_subparsers(dest="command", required=True)

    c = sub.add_parser("corr", parents=[common], help="correlators on an (x, t) grid")
    c.add_argument("--method", choices=("formfactor", "glm", "asymptotic"), default="formfactor")
    c.add_argument("--x", default="1:5:41")
    c.add_argument("--t", default="0")
    c.add_argument("--n-max", type=int, default=20)
    c.add_argument("--n-particles", type=int, default=4)
    c.add_argument("--mu-max", type=int, default=3)
    c.add_argument("--h", type=float, default=0.01)
    c.set_defaults(func=cmd_corr)

    s = sub.add_parser("scatter-check", parents=[common], help="Jost data from a field profile")
    s.add_argument("--p-theta", type=float, default=1.0)
    s.add_argument("--n-max", type=int, default=20)
    s.add_argument("--n-particles", type=int, default=6)
    s.add_argument("--x-min", type=float, default=-10.0)
    s.add_argument("--x-max", type=float, default=10.0)
    s.add_argument("--step", type=float, default=1e-3)
    s.add_argument("--tol", type=float, default=0.05)
    s.add_argument("--zero-field", action="store_true")
    s.set_defaults(func=cmd_scatter_check)

    k = sub.add_parser("kernels", parents=[common], help="GLM kernel tables")
    k.add_argument("--j", type=int, choices=(0, -1, -2), default=-1)
    k.add_argument("--x", default="2:6:5")
    k.add_argument("--t", type=float, default=0.0)
    k.add_argument("--representation", action="append", choices=REPRESENTATIONS)
    k.set_defaults(func=cmd_kernels)

    g = sub.add_parser("glm-solve", parents=[common], help="dump a GLM solution grid")
    g.add_argument("--x", type=float, default=2.0)
    g.add_argument("--t", type=float, default=0.0)
    g.add_argument("--L", type=float, default=None)
    g.add_argument("--h", type=float, default=0.01)
    g.add_argument("--method", choices=("nystrom", "degenerate"), default="nystrom")
    g.add_argument("--stride", type=int, default=10)
    g.set_defaults(func=cmd_glm_solve)

    a = sub.add_parser("asympt-verify", parents=[common], help="ansatz system and time-like checks")
    a.add_argument("--draws", type=int, default=20)
    a.add_argument("--xi-t", type=float, default=10.0)
    a.add_argument("--xi-d", type=float, default=1.0)
    a.add_argument("--xi-s", type=float, default=1.5)
    a.set_defaults(func=cmd_asympt_verify)
    return p


def _threads():
    v = os.environ.get("THERMAL_ISING_THREADS")
    if not v:
        return None
    try:
        n = int(v)
    except ValueError:
        raise ConfigError(f"THERMAL_ISING_THREADS must be an integer, got {v!r}") from None
    if n < 1:
        raise ConfigError("THERMAL_ISING_THREADS must be positive")
    return n


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as e:
        return EXIT_CONFIG if e.code else EXIT_OK
    meta = {k: v for k, v in vars(args).items() if k != "func"}
    try:
        n = _threads()
        params = ThermalParams(args.m, args.T)
        with threadpool_limits(limits=n):
            out = args.func(args, params)
    except (ConfigError, DomainError) as e:
        print(f"config error: {e}", file=sys.stderr)
        return EXIT_CONFIG
    except (ConvergenceError, ValidityError, ThermalIsingError) as e:
        print(f"numerical failure: {type(e).__name__}: {e}", file=sys.stderr)
        return EXIT_NUMERIC
    rows, code = out[0], out[1]
    if len(out) > 2:
        meta["result"] = out[2]
    if args.output == "-":
        emit(meta, rows, args.format, sys.stdout)
    else:
        with open(args.output, "w", newline="") as fh:
            emit(meta, rows, args.format, fh)
    return code


if __name__ == "__main__":
    sys.exit(main())
