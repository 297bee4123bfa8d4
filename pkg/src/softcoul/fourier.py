"""Radial Fourier transforms of the potential family.

Convention: ``F^(xi) = int F(x) exp(-2 pi i x.xi) dx`` in three dimensions,
which for a radial profile reduces to

    F^(xi) = (2/xi) int_0^inf sin(2 pi r xi) r F(r) dr.

Under it the Gaussian ``exp(-pi r^2)`` is its own transform and the Coulomb
potential maps to ``1/(pi xi^2)``.
"""
from __future__ import annotations

import enum
import math
from dataclasses import dataclass
from typing import Callable, Sequence

import numpy as np

from .errors import ConfigError, NonConvergenceError
from .specfun import laplace_integral

_GL_X, _GL_W = np.polynomial.legendre.leggauss(24)
_MAX_DEPTH = 25
# the softened factor exp(-C/r) is treated as exactly 0 below r = C/700
INTERIOR_CUTOFF = 700.0
# offset keeping b = -2 pi i xi + eps off the branch cut
K_LIMIT_EPS = 1e-12


class Method(str, enum.Enum):
    QUADRATURE = "quadrature"
    CLOSED_FORM = "closed_form"


@dataclass(frozen=True)
class FTSample:
    xi: float
    value: complex
    method: Method

    def __post_init__(self):
        if not self.xi > 0:
            raise ConfigError("xi must be positive")


@dataclass(frozen=True)
class Regularizer:
    """Exponential damping ``exp(k r)`` with ``k < 0``."""

    k: float

    def __post_init__(self):
        if not self.k < 0:
            raise ConfigError(f"regularizer needs k < 0, got {self.k}")


@dataclass(frozen=True)
class RegularizedFT:
    xi: float
    value: float
    laplace: complex  # int_0^inf exp(-C/r - b r) dr
    b: complex


def _gl(g, a, b):
    mid, half = 0.5 * (a + b), 0.5 * (b - a)
    return half * float(np.dot(_GL_W, g(mid + half * _GL_X)))


def _refine(g, a, b, whole, tol, depth):
    mid = 0.5 * (a + b)
    left, right = _gl(g, a, mid), _gl(g, mid, b)
    if abs(left + right - whole) <= tol or depth >= _MAX_DEPTH:
        return left + right
    return _refine(g, a, mid, left, tol, depth + 1) + _refine(g, mid, b, right, tol, depth + 1)


def panel_integral(g: Callable, a: float, b: float, rel: float = 1e-15) -> float:
    """Adaptive Gauss-Legendre on one panel; the tolerance is absolute, pinned to the panel scale."""
    whole = _gl(g, a, b)
    probe = np.max(np.abs(g(np.linspace(a, b, 9)[1:-1])))
    scale = max(abs(whole), probe * (b - a))
    return _refine(g, a, b, whole, rel * scale + 1e-300, 0)


def euler_average(partial_sums: Sequence[float], order: int) -> float:
    """Repeated pairwise averaging of the last ``order + 1`` partial sums."""
    s = np.asarray(partial_sums[-(order + 1):], dtype=np.float64)
    for _ in range(order):
        s = 0.5 * (s[1:] + s[:-1])
    return float(s[0])


def radial_ft_quadrature(
    f: Callable,
    xi: float,
    r_max: float = 1e6,
    tol: float = 1e-10,
    euler_order: int = 12,
) -> float:
    """Transform of the radial profile ``f`` at ``|xi| = xi`` by oscillatory quadrature.

    The half-line is cut at the zeros of ``sin(2 pi r xi)``; each half-period
    is integrated adaptively and the alternating sequence of partial sums is
    accelerated by Euler averaging. This also sums integrands that do not
    decay (Abel sense), e.g. the undamped softened potential.
    """
    if not xi > 0:
        raise ConfigError("xi must be positive")
    half = 0.5 / xi
    w = 2 * math.pi * xi

    def g(r):
        return np.sin(w * r) * r * f(r)

    terms: list[float] = []
    partial: list[float] = []
    prev = None
    calm = 0
    n = 0
    while (n + 1) * half <= r_max:
        terms.append(panel_integral(g, n * half, (n + 1) * half))
        partial.append(math.fsum(terms))
        n += 1
        if n <= euler_order + 2:
            continue
        est = euler_average(partial, euler_order)
        if prev is not None:
            floor = 1e-16 * max(abs(t) for t in terms)
            calm = calm + 1 if abs(est - prev) <= max(tol * abs(est), floor) else 0
            if calm >= 2:
                return 2.0 / xi * est
        prev = est
    raise NonConvergenceError(f"oscillatory quadrature did not stagnate before r_max = {r_max}")


def softened_radial(C: float, k: float = 0.0, Z: float = 1.0) -> Callable:
    """Vectorized profile ``Z exp(-C/r) exp(k r) / r`` with the interior cutoff applied."""
    if not C > 0:
        raise ConfigError("C must be positive")

    def F(r):
        r = np.asarray(r, dtype=np.float64)
        out = np.zeros(r.shape)
        live = r > C / INTERIOR_CUTOFF
        rr = r[live]
        out[live] = Z * np.exp(-C / rr + k * rr) / rr
        return out

    return F


def ft_regularized(C: float, reg, xi: float) -> RegularizedFT:
    """Closed form of the transform of ``exp(-C/r) exp(k r) / r``.

    With ``b = -(k + 2 pi i xi)``:  ``(2/xi) Im[ 2 sqrt(C/b) K_1(2 sqrt(C b)) ]``.
    """
    if not isinstance(reg, Regularizer):
        reg = Regularizer(float(reg))
    if not C > 0:
        raise ConfigError("C must be positive")
    if not xi > 0:
        raise ConfigError("xi must be positive")
    b = complex(-reg.k, -2 * math.pi * xi)
    lap = laplace_integral(C, b)
    return RegularizedFT(xi=xi, value=2.0 / xi * lap.imag, laplace=lap, b=b)


def ft_VP(C: float, xi: float) -> float:
    """Transform of the undamped softened potential (the ``k -> 0-`` limit)."""
    return ft_regularized(C, Regularizer(-K_LIMIT_EPS), xi).value


def ft_VP_quadrature(C: float, xi: float, k: float = 0.0, tol: float = 1e-10) -> float:
    return radial_ft_quadrature(softened_radial(C, k), xi, tol=tol)


def coulomb_ft(xi: float) -> float:
    return 1.0 / (math.pi * xi * xi)


def coulomb_limit_curve(xi: float, C_list: Sequence[float]) -> list:
    """``[(C, |pi xi^2 ft_VP(C, xi) - 1|), ...]``; ``C = 0`` means pure Coulomb (deviation 0)."""
    Cs = [float(c) for c in C_list]
    if any(b >= a for a, b in zip(Cs, Cs[1:])):
        raise ConfigError("C_list must be strictly decreasing")
    if any(c < 0 for c in Cs):
        raise ConfigError("C values must be nonnegative")
    rows = []
    for C in Cs:
        dev = 0.0 if C == 0 else abs(math.pi * xi * xi * ft_VP(C, xi) - 1.0)
        rows.append((C, dev))
    return rows
