"""Modified Bessel functions of complex argument and a Laplace-type integral.

``bessel_K1`` is evaluated by region on the principal branch:

* ``|z| <= SERIES_RADIUS``: ascending series with the logarithmic term and
  digamma coefficients (the order -> 1 limit of ``(I_{-a} - I_a)/sin(a pi)``
  taken analytically).
* ``SERIES_RADIUS < |z| < ASYMPTOTIC_RADIUS``: Steed's algorithm for
  Temme's continued fraction (``K_0`` and ``K_1`` together).
* ``|z| >= ASYMPTOTIC_RADIUS``: Hankel asymptotic expansion.

In the left half plane the continued fraction stalls near the cut, so
between the series disc and the asymptotic zone the reflection
``K_1(-z) = -K_1(z) -/+ i pi I_1(z)`` is used, except for
``|z| > 10`` away from the cut where the reflection would cancel badly.
"""
from __future__ import annotations

import cmath
import math

from .errors import BranchCutError, DomainError, NonConvergenceError

SERIES_RADIUS = 2.0
ASYMPTOTIC_RADIUS = 35.0
MAX_TERMS = 200
_EULER_GAMMA = 0.5772156649015329
_EPS = 1e-16
# left half plane: reflection inside this radius, and beyond it past _STEED_MAX_ARG
_REFLECT_RADIUS = 10.0
_STEED_MAX_ARG = 2.65


def _as_complex(z) -> complex:
    z = complex(z)
    if not (math.isfinite(z.real) and math.isfinite(z.imag)):
        raise DomainError(f"non-finite argument {z}")
    return z


def _finite(value: complex, what: str) -> complex:
    if not (math.isfinite(value.real) and math.isfinite(value.imag)):
        raise NonConvergenceError(f"{what} produced a non-finite value")
    return value


def _rgamma(x: float) -> float:
    """1/Gamma(x), zero at the poles."""
    if x <= 0 and x == math.floor(x):
        return 0.0
    return 1.0 / math.gamma(x)


def bessel_I(nu: float, z) -> complex:
    """Modified Bessel function of the first kind, ``sum_k (z/2)^(nu+2k) / (k! Gamma(nu+k+1))``.

    Summed until the terms stagnate at machine precision; raises
    :class:`NonConvergenceError` if 200 terms are not enough.
    """
    z = _as_complex(z)
    nu = float(nu)
    if z == 0:
        if nu == 0:
            return 1.0 + 0j
        if nu > 0 or nu == math.floor(nu):
            return 0j
        raise DomainError(f"I_{nu}(0) is infinite")
    half = z / 2
    if nu != math.floor(nu) and z.imag == 0 and z.real < 0:
        raise BranchCutError("non-integer order on the negative real axis")
    lead = cmath.exp(nu * cmath.log(half))
    q = half * half
    total = 0j
    power = 1 + 0j  # q**k / k!
    for k in range(MAX_TERMS):
        term = power * _rgamma(nu + k + 1)
        total += term
        if k > 2 and abs(term) <= _EPS * abs(total):
            return _finite(lead * total, "bessel_I")
        power = power * q / (k + 1)
    raise NonConvergenceError(f"I_{nu}({z}) series did not stagnate in {MAX_TERMS} terms")


def _k1_series(z: complex) -> complex:
    # K1 = 1/z + ln(z/2) I1(z) - (z/4) sum_k [psi(k+1) + psi(k+2)] (z^2/4)^k / (k! (k+1)!)
    q = z * z / 4
    term = 1 + 0j
    psi1, psi2 = -_EULER_GAMMA, 1 - _EULER_GAMMA
    i1_sum = 0j
    psi_sum = 0j
    for k in range(MAX_TERMS):
        i1_sum += term
        psi_sum += (psi1 + psi2) * term
        if k > 2 and abs(term) <= _EPS * abs(i1_sum):
            break
        term = term * q / ((k + 1) * (k + 2))
        psi1 += 1.0 / (k + 1)
        psi2 += 1.0 / (k + 2)
    else:
        raise NonConvergenceError(f"K1 series did not stagnate at z = {z}")
    return 1 / z + cmath.log(z / 2) * (z / 2) * i1_sum - (z / 4) * psi_sum


def _k1_steed(z: complex) -> complex:
    # Temme's CF2 at order 0, evaluated with Steed's algorithm; returns K1
    b = 2.0 * (1.0 + z)
    d = 1.0 / b
    h = delh = d
    q1, q2 = 0j, 1 + 0j
    a1 = 0.25
    q = c = a1
    a = -a1
    s = 1.0 + q * delh
    for i in range(2, 20_000):
        a -= 2 * (i - 1)
        c = -a * c / i
        qnew = (q1 - b * q2) / a
        q1, q2 = q2, qnew
        q += c * qnew
        b += 2.0
        d = 1.0 / (b + a * d)
        delh = (b * d - 1.0) * delh
        h += delh
        dels = q * delh
        s += dels
        if abs(dels) < _EPS * abs(s):
            break
    else:
        raise NonConvergenceError(f"K1 continued fraction did not converge at z = {z}")
    k0 = cmath.sqrt(math.pi / (2 * z)) * cmath.exp(-z) / s
    return k0 * (z + 0.5 - a1 * h) / z


def _k1_asymptotic(z: complex) -> complex:
    # e^{-z} sqrt(pi/2z) (1 + (mu-1)/8z + (mu-1)(mu-9)/(2!(8z)^2) + ...), mu = 4
    total = 1 + 0j
    term = 1 + 0j
    for k in range(1, 60):
        term = term * (4 - (2 * k - 1) ** 2) / (k * 8 * z)
        total += term
        if abs(term) <= _EPS * abs(total):
            break
    return cmath.sqrt(math.pi / (2 * z)) * cmath.exp(-z) * total


def _k1_right(z: complex) -> complex:
    r = abs(z)
    if r <= SERIES_RADIUS:
        return _k1_series(z)
    if r >= ASYMPTOTIC_RADIUS:
        return _k1_asymptotic(z)
    return _k1_steed(z)


def bessel_K1(z) -> complex:
    """Modified Bessel function of the second kind, order 1, principal branch."""
    z = _as_complex(z)
    if z == 0:
        raise DomainError("K1 has a pole at z = 0")
    if z.imag == 0 and z.real < 0:
        raise BranchCutError("K1 is cut along the negative real axis")
    r = abs(z)
    if z.real >= 0 or not SERIES_RADIUS < r < ASYMPTOTIC_RADIUS:
        return _finite(_k1_right(z), "bessel_K1")
    if r > _REFLECT_RADIUS and abs(cmath.phase(z)) <= _STEED_MAX_ARG:
        return _finite(_k1_steed(z), "bessel_K1")
    w = -z
    # z = w e^{+i pi} when Im z > 0
    sign = 1.0 if z.imag > 0 else -1.0
    value = -_k1_right(w) - sign * 1j * math.pi * bessel_I(1, w)
    return _finite(value, "bessel_K1")


def laplace_integral(a: float, b) -> complex:
    """``int_0^inf exp(-a/r - b r) dr = 2 sqrt(a/b) K_1(2 sqrt(a b))`` for a > 0, Re b > 0."""
    b = _as_complex(b)
    if not a > 0:
        raise DomainError(f"a must be positive, got {a}")
    if not b.real > 0:
        raise DomainError(f"Re(b) must be positive, got {b}")
    return 2 * cmath.sqrt(a / b) * bessel_K1(2 * cmath.sqrt(a * b))
