"""Fast invariant suites and the independent numerical oracles they use.

The oracles rely on generic adaptive quadrature (``scipy.integrate.quad``)
and never call the closed forms they check.
"""
from __future__ import annotations

import math
import time
from dataclasses import dataclass

import numpy as np
from scipy import integrate

from . import fourier, potentials, propagator, spectral, specfun


# --- oracles ------------------------------------------------------------------


def k1_integral(z) -> complex:
    """``K_1(z) = int_0^inf exp(-z cosh t) cosh t dt`` for Re z > 0."""
    z = complex(z)
    if not z.real > 0:
        raise ValueError("integral representation needs Re z > 0")
    # cut where exp(-Re z cosh t) < 1e-300 relative
    t_max = math.acosh(max(745.0 / z.real, 1.0)) + 1.0

    def part(fn):
        return integrate.quad(fn, 0.0, t_max, epsabs=0.0, epsrel=1e-13, limit=2000)[0]

    re = part(lambda t: math.exp(-z.real * math.cosh(t)) * math.cos(z.imag * math.cosh(t)) * math.cosh(t))
    im = part(lambda t: -math.exp(-z.real * math.cosh(t)) * math.sin(z.imag * math.cosh(t)) * math.cosh(t))
    return complex(re, im)


def laplace_quadrature(a: float, b: complex) -> complex:
    """``int_0^inf exp(-a/r - b r) dr`` by adaptive quadrature."""
    b = complex(b)
    r_max = 745.0 / b.real + 10.0

    def f(r, part):
        if r == 0:
            return 0.0
        v = np.exp(-a / r - b * r)
        return v.real if part == 0 else v.imag

    pts = [a / 50, a, math.sqrt(a / b.real)]
    pts = sorted(p for p in pts if 0 < p < r_max)
    out = []
    for part in (0, 1):
        val = integrate.quad(f, 0.0, r_max, args=(part,), points=pts, epsabs=0.0, epsrel=1e-12, limit=5000)[0]
        out.append(val)
    return complex(*out)


def fd_laplacian_3d(spec, r: float, rel_step: float = 1e-3) -> float:
    """Trace of the fourth-order finite-difference Hessian of ``V(|x|)`` at ``x = (r, 0, 0)``."""
    x0 = np.array([r, 0.0, 0.0])
    step = rel_step * r

    def f(x):
        return float(potentials.evaluate(spec, np.linalg.norm(x)))

    total = 0.0
    for j in range(3):
        e = np.zeros(3)
        e[j] = step
        total += (-f(x0 + 2 * e) + 16 * f(x0 + e) - 30 * f(x0) + 16 * f(x0 - e) - f(x0 - 2 * e)) / (12 * step**2)
    return total


def fd_gradient(spec, x, j: int, step: float = 1e-5) -> float:
    x = np.asarray(x, dtype=float)
    e = np.zeros(3)
    e[j] = step
    fp = float(potentials.evaluate(spec, np.linalg.norm(x + e)))
    fm = float(potentials.evaluate(spec, np.linalg.norm(x - e)))
    return (fp - fm) / (2 * step)


# --- suites -------------------------------------------------------------------


@dataclass
class SuiteResult:
    name: str
    passed: bool
    detail: str
    seconds: float


def _rel(a, b) -> float:
    return abs(a - b) / abs(b)


def suite_potentials(rng: np.random.Generator) -> str:
    worst_g = worst_l = 0.0
    for C in (0.5, 1.0, 2.0):
        spec = potentials.PotentialSpec.softened(C)
        for r in rng.uniform(0.3, 10.0, 8):
            d = rng.normal(size=3)
            x = r * d / np.linalg.norm(d)
            j = int(rng.integers(3))
            g = potentials.grad_component(spec, x, j)
            if abs(x[j]) > 0.05 * r:
                worst_g = max(worst_g, _rel(g, fd_gradient(spec, x, j)))
            worst_l = max(worst_l, _rel(float(potentials.laplacian(spec, r)), fd_laplacian_3d(spec, r)))
    res = potentials.radial_momentum_residual(potentials.PotentialSpec.softened(1.0), np.linspace(0.1, 10, 50))
    assert worst_g < 1e-6, f"gradient vs FD {worst_g:.2e}"
    assert worst_l < 1e-5, f"laplacian vs FD {worst_l:.2e}"
    assert res < 1e-12, f"eigenrelation residual {res:.2e}"
    return f"grad {worst_g:.1e}, laplacian {worst_l:.1e}, P1 {res:.1e}"


def suite_specfun(rng: np.random.Generator) -> str:
    # seams of the region split plus random points; the budget is tighter than
    # the public tolerance so that a shifted crossover shows up
    pts = [0.5, 1.9, 2.0, 2.1, 9.5, 9.9, 10.5, 34.9, 35.1]
    pts += list(np.exp(rng.uniform(math.log(1e-3), math.log(30), 6)))
    worst = max(_rel(specfun.bessel_K1(z), k1_integral(z)) for z in pts)
    cpts = [abs(z) * np.exp(1j * a) for z, a in zip(pts, rng.uniform(-math.pi / 3, math.pi / 3, len(pts)))]
    worst_c = max(_rel(specfun.bessel_K1(z), k1_integral(z)) for z in cpts)
    assert worst < 1e-11, f"real K1 vs integral {worst:.2e}"
    assert worst_c < 1e-8, f"complex K1 vs integral {worst_c:.2e}"
    return f"real {worst:.1e}, complex {worst_c:.1e}"


def suite_fourier(rng: np.random.Generator) -> str:
    gauss = max(
        abs(fourier.radial_ft_quadrature(lambda r: np.exp(-np.pi * r * r), xi) - math.exp(-math.pi * xi * xi))
        for xi in (0.3, 1.0, 2.0)
    )
    gap = 0.0
    for C, xi in ((0.5, 1.0), (1.0, 5.0), (2.0, 0.1)):
        q = fourier.ft_VP_quadrature(C, xi, k=-1.0)
        gap = max(gap, _rel(fourier.ft_regularized(C, -1.0, xi).value, q))
    assert gauss < 1e-8, f"Gaussian convention lock {gauss:.2e}"
    assert gap < 1e-6, f"closed form vs quadrature {gap:.2e}"
    return f"gaussian {gauss:.1e}, closed/quad {gap:.1e}"


def suite_spectral(rng: np.random.Generator) -> str:
    g = spectral.RadialGrid.from_rmax(0.02, 60)
    op = spectral.build_radial(potentials.PotentialSpec.coulomb(), 0, g)
    E = spectral.bound_states(op, 2)
    dense = op.dense()
    assert np.array_equal(dense, dense.T), "unscaled operator not symmetric"
    assert abs(E[0] + 0.25) < 1e-3 and abs(E[1] + 0.0625) < 1e-3, f"Coulomb levels {E}"
    rep = spectral.complex_spectrum(
        spectral.build_radial(potentials.PotentialSpec.coulomb(), 0, spectral.RadialGrid(40 / 201, 200), 0.3j)
    )
    b = rep.bound
    assert b.size and np.min(np.abs(b + 0.25)) < 1e-2, "no bound eigenvalue near -1/4"
    return f"E1 {E[0]:.6f}, E2 {E[1]:.6f}, continuum fraction {rep.continuum_fraction():.2f}"


def suite_propagator(rng: np.random.Generator) -> str:
    grid = propagator.Grid3D(24, 24.0)
    cfg = propagator.PropagationConfig(grid=grid, dt=0.01, C=1.0)
    psi = propagator.WaveFunction3D(propagator.gaussian_packet(grid, 1.5).amplitudes, grid)
    prop = propagator.Propagator(cfg)
    fwd = prop.evolve(psi, 0.0, 0.5)
    back = prop.evolve(fwd, 0.5, 0.0)
    drift = abs(fwd.norm() - 1)
    rev = back.distance(psi)
    assert drift < 1e-10, f"norm drift {drift:.2e}"
    assert rev < 1e-8, f"time reversal {rev:.2e}"
    return f"norm drift {drift:.1e}, reversal {rev:.1e}"


SUITES = {
    "potentials": suite_potentials,
    "specfun": suite_specfun,
    "fourier": suite_fourier,
    "spectral": suite_spectral,
    "propagator": suite_propagator,
}


def run_selftest(seed: int = 0, names=None) -> list:
    out = []
    for name in names or SUITES:
        rng = np.random.default_rng(seed)
        t0 = time.perf_counter()
        try:
            detail = SUITES[name](rng)
            ok = True
        except AssertionError as exc:
            ok, detail = False, str(exc)
        out.append(SuiteResult(name, ok, detail, time.perf_counter() - t0))
    return out
