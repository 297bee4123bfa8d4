"""Command-line experiment runner.

Every subcommand writes CSV (17 significant digits) to ``--out`` or stdout,
plus a JSON manifest ``<out>.manifest.json`` when ``--out`` is given.
Exit codes: 0 ok, 2 configuration error, 3 numerical failure; errors are
reported as one JSON object on stderr. All quantities are in atomic units.
"""
from __future__ import annotations

import argparse
import csv
import io
import json
import math
import os
import platform
import sys
import time
from concurrent.futures import ProcessPoolExecutor
from pathlib import Path

import numpy as np

from . import __version__, fourier, potentials, propagator, spectral
from .errors import ConfigError, GridResolutionError, NumericalError, SoftCoulError

SCHEMAS = {
    "potential-table": "r,V,dVdr,laplacian",
    "ft-table": "C,xi,re,im,method",
    "coulomb-limit": "C,xi,deviation",
    "eig-scan": "C,ell,theta_im,index,re,im,class",
    "complex-scaling": "C,ell,theta_im,index,re,im,class",
    "propagate": "t,norm,x2,ynorm",
    "dilatation-check": "C,beta,passes_II,passes_III,sup_far,sup_near",
    "selftest": "suite,passed,seconds,detail",
}


# --- parsing helpers -------------------------------------------------------------


def parse_floats(text: str) -> list:
    """``"a,b,c"`` or ``"start:stop:logN"`` / ``"start:stop:linN"``."""
    text = text.strip()
    try:
        if ":" in text:
            a, b, mode = text.split(":")
            a, b = float(a), float(b)
            if mode.startswith("log"):
                if not (a > 0 and b > 0):
                    raise ConfigError(f"log range needs positive ends: {text!r}")
                return np.geomspace(a, b, int(mode[3:])).tolist()
            if mode.startswith("lin"):
                return np.linspace(a, b, int(mode[3:])).tolist()
            raise ConfigError(f"range mode must be logN or linN: {text!r}")
        return [float(v) for v in text.split(",") if v.strip()]
    except ValueError as exc:
        raise ConfigError(f"cannot parse number list {text!r}") from exc


def fmt(v) -> str:
    if isinstance(v, (bool, np.bool_)):
        return "true" if v else "false"
    if isinstance(v, (int, np.integer)):
        return str(int(v))
    if isinstance(v, (float, np.floating)):
        return "%.17g" % v
    return str(v)


def csv_text(header: str, rows) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(header.split(","))
    for row in rows:
        w.writerow([fmt(v) for v in row])
    return buf.getvalue()


def _pool_map(fn, items, jobs: int):
    # results come back in input order whatever the completion order
    if jobs <= 1 or len(items) <= 1:
        return [fn(it) for it in items]
    with ProcessPoolExecutor(max_workers=jobs) as ex:
        return list(ex.map(fn, items))


def _default_jobs() -> int:
    raw = os.environ.get("SOFTCOUL_JOBS", "1")
    try:
        return max(1, int(raw))
    except ValueError:
        return 1


# --- workers (top level so they pickle) ---------------------------------------------


def _ft_point(args):
    C, xi, method, k = args
    rows = []
    if method in ("closed", "both"):
        val = fourier.ft_VP(C, xi) if k is None else fourier.ft_regularized(C, k, xi).value
        rows.append((C, xi, val, 0.0, fourier.Method.CLOSED_FORM.value))
    if method in ("quadrature", "both"):
        val = fourier.ft_VP_quadrature(C, xi, k=0.0 if k is None else k)
        rows.append((C, xi, val, 0.0, fourier.Method.QUADRATURE.value))
    return rows


def _eig_point(args):
    C, ell, h, r_max, count = args
    spec = potentials.PotentialSpec.coulomb() if C == 0 else potentials.PotentialSpec.softened(C)
    E = spectral.bound_states(spectral.build_radial(spec, ell, spectral.RadialGrid.from_rmax(h, r_max)), count)
    return [(C, ell, 0.0, i, e, 0.0, spectral.EigClass.BOUND.value) for i, e in enumerate(E)]


def _cs_point(args):
    C, ell, th, n, r_max, tol_b, tol_c = args
    spec = potentials.PotentialSpec.coulomb() if C == 0 else potentials.PotentialSpec.softened(C)
    op = spectral.build_radial(spec, ell, spectral.RadialGrid(r_max / (n + 1), n), 1j * th)
    rep = spectral.complex_spectrum(op, tol_b=tol_b, tol_c=tol_c, stability_delta=None)
    return spectral.spectrum_rows(C, rep, ell)


def _dil_point(args):
    C, beta = args
    rep = spectral.check_dilatation_conditions(potentials.PotentialSpec.softened(C), beta)
    return [(C, beta, rep.passes_II, rep.passes_III, float(rep.sup_far[-1]), float(rep.sup_near[-1]))]


def _flatten(chunks):
    return [row for chunk in chunks for row in chunk]


# --- subcommands -----------------------------------------------------------------


def cmd_potential_table(a):
    spec = potentials.PotentialSpec(a.family, C=a.C, alpha=a.alpha, c=a.c, Z=a.Z)
    r = np.asarray(parse_floats(a.r))
    if np.any(r <= 0):
        raise ConfigError("radii must be positive")
    V = potentials.evaluate(spec, r)
    dV = potentials.radial_derivative(spec, r)
    lap = potentials.laplacian(spec, r) if spec.family is potentials.Family.SOFTENED else np.full(r.shape, math.nan)
    return list(zip(r, V, dV, lap)), {"family": spec.family.value, "C": a.C, "alpha": a.alpha, "c": a.c, "Z": a.Z, "r": a.r}


def cmd_ft_table(a):
    Cs, xis = parse_floats(a.C), parse_floats(a.xi)
    if a.k is not None and not a.k < 0:
        raise ConfigError("--k must be negative")
    items = [(C, xi, a.method, a.k) for C in Cs for xi in xis]
    for C, xi, _, _ in items:
        if not (C > 0 and xi > 0):
            raise ConfigError("C and xi must be positive")
    rows = _flatten(_pool_map(_ft_point, items, a.jobs))
    return rows, {"C": Cs, "xi": a.xi, "method": a.method, "k": a.k}


def cmd_coulomb_limit(a):
    Cs = parse_floats(a.C)
    rows = [(C, a.xi, dev) for C, dev in fourier.coulomb_limit_curve(a.xi, Cs)]
    return rows, {"C": Cs, "xi": a.xi}


def cmd_eig_scan(a):
    Cs = parse_floats(a.C)
    positive = [c for c in Cs if c > 0]
    h = a.h if a.h is not None else (min(min(positive), 1.0) / 20 if positive else 0.01)
    if any(b >= c for c, b in zip(Cs, Cs[1:])):
        raise ConfigError("--C must be strictly decreasing")
    if positive and h > min(min(positive), 1.0) / 20:
        C = min(positive)
        raise GridResolutionError(f"h = {h} does not resolve C = {C}; need h <= {min(C, 1.0) / 20}")
    rows = _flatten(_pool_map(_eig_point, [(C, a.ell, h, a.r_max, a.count) for C in Cs], a.jobs))
    return rows, {"C": Cs, "ell": a.ell, "h": h, "r_max": a.r_max, "count": a.count}


def cmd_complex_scaling(a):
    Cs, thetas = parse_floats(a.C), parse_floats(a.theta)
    for th in thetas:
        if not 0 < th < math.pi / 2:
            raise ConfigError("--theta values must lie in (0, pi/2)")
    items = [(C, a.ell, th, a.n, a.r_max, a.tol_b, a.tol_c) for C in Cs for th in thetas]
    rows = _flatten(_pool_map(_cs_point, items, a.jobs))
    return rows, {"C": Cs, "theta_im": thetas, "ell": a.ell, "n": a.n, "r_max": a.r_max, "tol_b": a.tol_b, "tol_c": a.tol_c}


def cmd_propagate(a):
    cfg = propagator.PropagationConfig.from_json(a.config)
    psi0 = propagator.make_groundstate(cfg.grid, a.state)
    diag = propagator.evolve_with_diagnostics(cfg, psi0)
    rows = [(d.t, d.norm, d.x2, d.ynorm) for d in diag]
    params = json.loads(Path(a.config).read_text())
    params["state"] = a.state
    if cfg.dyson_order > 0 and cfg.C is not None:
        ref = propagator.Propagator(cfg).evolve(psi0, 0.0, cfg.t_final)
        dy = propagator.dyson_propagate(psi0, 0.0, cfg.t_final, cfg)
        params["dyson_error"] = dy.distance(ref)
        params["dyson_bound"] = propagator.truncation_bound(cfg.t_final, cfg.C, cfg.dyson_order)
    return rows, params


def cmd_dilatation_check(a):
    Cs, betas = parse_floats(a.C), parse_floats(a.beta)
    rows = _flatten(_pool_map(_dil_point, [(C, b) for C in Cs for b in betas], a.jobs))
    return rows, {"C": Cs, "beta": betas}


def cmd_selftest(a):
    from .selftest import run_selftest

    results = run_selftest(a.seed)
    for r in results:
        print(f"{'PASS' if r.passed else 'FAIL'}  {r.name:<11s} {r.seconds:6.2f}s  {r.detail}", file=sys.stderr)
    rows = [(r.name, r.passed, r.seconds, r.detail) for r in results]
    return rows, {"suites": [r.name for r in results], "failed": [r.name for r in results if not r.passed]}


COMMANDS = {
    "potential-table": cmd_potential_table,
    "ft-table": cmd_ft_table,
    "coulomb-limit": cmd_coulomb_limit,
    "eig-scan": cmd_eig_scan,
    "complex-scaling": cmd_complex_scaling,
    "propagate": cmd_propagate,
    "dilatation-check": cmd_dilatation_check,
    "selftest": cmd_selftest,
}


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        raise ConfigError(message)


def build_parser() -> argparse.ArgumentParser:
    common = _Parser(add_help=False)
    common.add_argument("--out", help="CSV path (default stdout); a manifest is written next to it")
    common.add_argument("--seed", type=int, default=0)
    common.add_argument("--jobs", type=int, default=_default_jobs(), help="worker processes (env SOFTCOUL_JOBS)")

    p = _Parser(prog="softcoul", description=__doc__, formatter_class=argparse.RawDescriptionHelpFormatter)
    p.add_argument("--version", action="version", version=__version__)
    sub = p.add_subparsers(dest="command", required=True, parser_class=_Parser)

    def add(name, help_text):
        return sub.add_parser(
            name, parents=[common], help=help_text, description=f"{help_text}\n\nCSV columns: {SCHEMAS[name]}",
            formatter_class=argparse.RawDescriptionHelpFormatter,
        )

    s = add("potential-table", "Tabulate V, dV/dr and the Laplacian on a radial grid.")
    s.add_argument("--family", choices=[f.value for f in potentials.Family], default="softened")
    s.add_argument("--C", type=float, default=1.0)
    s.add_argument("--alpha", type=float, default=1.0)
    s.add_argument("--c", type=float, default=1.0)
    s.add_argument("--Z", type=float, default=1.0)
    s.add_argument("--r", default="0.1:10:lin100")

    s = add("ft-table", "Fourier transform of the softened potential by closed form and/or quadrature.")
    s.add_argument("--C", default="1")
    s.add_argument("--xi", default="0.1:10:log25")
    s.add_argument("--method", choices=["closed", "quadrature", "both"], default="both")
    s.add_argument("--k", type=float, default=None, help="damping rate k < 0 (default: undamped limit)")

    s = add("coulomb-limit", "Deviation |pi xi^2 FT - 1| as C decreases.")
    s.add_argument("--C", default="0.1,0.01,0.001")
    s.add_argument("--xi", type=float, default=1.0)

    s = add("eig-scan", "Lowest radial eigenvalues for decreasing C (C = 0 is Coulomb).")
    s.add_argument("--C", default="0.1,0.01,0.001")
    s.add_argument("--ell", type=int, default=0)
    s.add_argument("--h", type=float, default=None, help="default min(C, 1)/20")
    s.add_argument("--r-max", type=float, default=40.0)
    s.add_argument("--count", type=int, default=1)

    s = add("complex-scaling", "Classified spectrum of the dilated radial operator.")
    s.add_argument("--C", default="0")
    s.add_argument("--ell", type=int, default=0)
    s.add_argument("--theta", default="0.2,0.3", help="Im theta values")
    s.add_argument("--n", type=int, default=500)
    s.add_argument("--r-max", type=float, default=40.0)
    s.add_argument("--tol-b", type=float, default=spectral.DEFAULT_TOL_B)
    s.add_argument("--tol-c", type=float, default=spectral.DEFAULT_TOL_C)

    s = add("propagate", "Reference propagation with norm, <x^2> and Y-norm diagnostics.")
    s.add_argument("--config", required=True, help="run JSON: {grid:{n,box}, dt, t_final, C, dyson_order, trajectory_file, diagnostics_stride}")
    s.add_argument("--state", choices=[g.value for g in propagator.GroundState], default="HydrogenTrue")

    s = add("dilatation-check", "Sector decay and origin flatness along complex rays.")
    s.add_argument("--C", default="0.1,1,10")
    s.add_argument("--beta", default=",".join(str(math.pi * m / 8) for m in (1, 2, 3)))

    add("selftest", "Fast invariant suites; nonzero exit on failure.")
    return p


def _emit_error(exc: Exception, code: int) -> int:
    print(json.dumps({"error": type(exc).__name__, "message": str(exc), "exit_code": code}), file=sys.stderr)
    return code


def main(argv=None) -> int:
    try:
        args = build_parser().parse_args(argv)
        if args.jobs < 1:
            raise ConfigError("--jobs must be positive")
        np.random.seed(args.seed)
        t0 = time.perf_counter()
        rows, params = COMMANDS[args.command](args)
        wall = time.perf_counter() - t0
    except SystemExit as exc:  # --help / --version
        return int(exc.code or 0)
    except ConfigError as exc:
        return _emit_error(exc, 2)
    except (NumericalError, SoftCoulError) as exc:
        return _emit_error(exc, 3)

    text = csv_text(SCHEMAS[args.command], rows)
    if args.out:
        out = Path(args.out)
        out.write_text(text)
        manifest = {
            "experiment": args.command,
            "parameters": params,
            "seed": args.seed,
            "versions": {"softcoul": __version__, "numpy": np.__version__, "python": platform.python_version()},
            "wall_time": wall,
        }
        Path(str(out) + ".manifest.json").write_text(json.dumps(manifest, indent=2, default=str))
    else:
        sys.stdout.write(text)
    if args.command == "selftest" and any(not r[1] for r in rows):
        return 1
    return 0


if __name__ == "__main__":
    sys.exit(main())
