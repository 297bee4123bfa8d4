"""Radial eigenproblems for ``-d^2/dr^2 + l(l+1)/r^2 - V(r)`` and their complex-scaled versions.

The reduced radial function ``u = r psi`` is discretized by second-order
central differences on ``r_j = j h`` (j = 1..n) with Dirichlet ends at 0 and
``(n + 1) h``. Under the dilatation ``r -> e^theta r`` the kinetic part picks
up ``e^{-2 theta}`` and the potential is evaluated at complex radii.

In these units (kinetic operator ``-Laplacian``) hydrogen has
``E_n = -1/(4 n^2)``.
"""
from __future__ import annotations

import cmath
import enum
import math
from dataclasses import dataclass, field
from typing import Sequence

import numba
import numpy as np

from .errors import ConfigError, GridResolutionError, NonConvergenceError, SectorViolationError
from .potentials import Family, PotentialSpec, evaluate

DEFAULT_TOL_B = 1e-3
DEFAULT_TOL_C = 0.05
STABILITY_DELTA = 0.05
MAX_DENSE_N = 2000


class EigClass(str, enum.Enum):
    BOUND = "Bound"
    ROTATED_CONTINUUM = "RotatedContinuum"
    UNRESOLVED = "Unresolved"


@dataclass(frozen=True)
class RadialGrid:
    h: float
    n: int

    def __post_init__(self):
        if not self.h > 0:
            raise ConfigError("grid spacing must be positive")
        if self.n < 3:
            raise ConfigError("radial grid needs n >= 3 interior nodes")

    @classmethod
    def from_rmax(cls, h: float, r_max: float) -> "RadialGrid":
        return cls(h, int(round(r_max / h)) - 1)

    @property
    def r(self) -> np.ndarray:
        return self.h * np.arange(1, self.n + 1)

    @property
    def r_max(self) -> float:
        return self.h * (self.n + 1)


@dataclass(frozen=True)
class RadialOperator:
    ell: int
    grid: RadialGrid
    theta: complex
    diag: np.ndarray = field(repr=False)
    offdiag: np.ndarray = field(repr=False)
    spec: PotentialSpec | None = None

    def dense(self) -> np.ndarray:
        return np.diag(self.diag) + np.diag(self.offdiag, 1) + np.diag(self.offdiag, -1)


def _check_sector(theta: complex) -> None:
    if abs(theta.imag) >= math.pi / 2:
        raise SectorViolationError(f"|Im theta| must be < pi/2, got {theta.imag}")


def build_radial(spec: PotentialSpec, ell: int, grid: RadialGrid, theta: complex = 0j) -> RadialOperator:
    """Tridiagonal matrix of ``e^{-2 theta}(-d^2/dr^2 + l(l+1)/r^2) - V(e^theta r)``."""
    theta = complex(theta)
    if ell < 0 or int(ell) != ell:
        raise ConfigError("ell must be a nonnegative integer")
    _check_sector(theta)
    r = grid.r
    h2 = grid.h * grid.h
    if theta == 0:
        diag = 2.0 / h2 + ell * (ell + 1) / r**2 - evaluate(spec, r)
        off = np.full(grid.n - 1, -1.0 / h2)
    else:
        kin = cmath.exp(-2 * theta)
        z = cmath.exp(theta) * r
        diag = kin * (2.0 / h2 + ell * (ell + 1) / r**2) - evaluate(spec, z)
        off = np.full(grid.n - 1, -kin / h2, dtype=complex)
    return RadialOperator(int(ell), grid, theta, diag, off, spec)


# --- Sturm-sequence bisection -------------------------------------------------


@numba.njit(cache=True)
def _sturm_count(d, e2, x):
    # number of eigenvalues < x, from the signs of the LDL^T pivots of T - x
    c = 0
    q = 1.0
    for i in range(d.size):
        if i == 0:
            q = d[0] - x
        else:
            q = d[i] - x - e2[i - 1] / q
        if q == 0.0:
            q = -1e-300
        if q < 0.0:
            c += 1
    return c


@numba.njit(cache=True)
def _bisect(d, e2, k, lo, hi, rtol):
    for _ in range(200):
        if hi - lo <= rtol * max(1.0, abs(lo) + abs(hi)):
            break
        mid = 0.5 * (lo + hi)
        if _sturm_count(d, e2, mid) > k:
            hi = mid
        else:
            lo = mid
    return 0.5 * (lo + hi)


def tridiagonal_lowest(d: np.ndarray, e: np.ndarray, count: int, rtol: float = 1e-15) -> np.ndarray:
    """Lowest ``count`` eigenvalues of a real symmetric tridiagonal matrix."""
    d = np.ascontiguousarray(d, dtype=np.float64)
    e = np.ascontiguousarray(e, dtype=np.float64)
    if count > d.size or count < 1:
        raise ConfigError(f"count must be in [1, {d.size}], got {count}")
    radius = np.zeros(d.size)
    radius[:-1] += np.abs(e)
    radius[1:] += np.abs(e)
    lo, hi = float(np.min(d - radius)), float(np.max(d + radius))
    e2 = e * e
    return np.array([_bisect(d, e2, k, lo, hi, rtol) for k in range(count)])


def bound_states(op: RadialOperator, count: int) -> list:
    if op.theta != 0:
        raise ConfigError("bound_states needs the unscaled operator (theta = 0)")
    return tridiagonal_lowest(op.diag, op.offdiag, count).tolist()


# --- complex scaling ------------------------------------------------------------


@dataclass
class SpectrumReport:
    eigenvalues: np.ndarray
    classification: list
    theta: complex
    stability: dict  # bound eigenvalue index -> |drift| under theta + i*delta
    tol_b: float = DEFAULT_TOL_B
    tol_c: float = DEFAULT_TOL_C

    def of_class(self, cls: EigClass) -> np.ndarray:
        return np.array([v for v, c in zip(self.eigenvalues, self.classification) if c is cls])

    @property
    def bound(self) -> np.ndarray:
        return self.of_class(EigClass.BOUND)

    def continuum_fraction(self) -> float:
        """Share of the non-bound eigenvalues lying on the rotated ray."""
        rest = [c for c in self.classification if c is not EigClass.BOUND]
        if not rest:
            return float("nan")
        return sum(c is EigClass.ROTATED_CONTINUUM for c in rest) / len(rest)


def classify(eigs: np.ndarray, theta: complex, tol_b: float, tol_c: float, threshold: float = 0.0) -> list:
    out = []
    for lam in eigs:
        if abs(lam.imag) < tol_b and lam.real < threshold:
            out.append(EigClass.BOUND)
        elif abs(cmath.phase(lam - threshold) + 2 * theta.imag) < tol_c:
            out.append(EigClass.ROTATED_CONTINUUM)
        else:
            out.append(EigClass.UNRESOLVED)
    return out


def _dense_eigs(op: RadialOperator) -> np.ndarray:
    if op.grid.n > MAX_DENSE_N:
        raise ConfigError(f"dense eigensolve limited to n <= {MAX_DENSE_N}")
    try:
        ev = np.linalg.eigvals(op.dense())
    except np.linalg.LinAlgError as exc:
        raise NonConvergenceError(f"eigensolver failed: {exc}") from exc
    return ev[np.lexsort((ev.imag, ev.real))]


def complex_spectrum(
    op: RadialOperator,
    count: int | None = None,
    tol_b: float = DEFAULT_TOL_B,
    tol_c: float = DEFAULT_TOL_C,
    stability_delta: float | None = STABILITY_DELTA,
) -> SpectrumReport:
    """Eigenvalues of the scaled operator sorted by real part, with classification.

    ``count`` keeps the lowest eigenvalues by real part. The drift of each
    bound eigenvalue is measured against a rebuild at ``theta + i delta``.
    """
    theta = op.theta
    if not 0 < theta.imag < math.pi / 2:
        raise SectorViolationError("complex_spectrum needs Im theta in (0, pi/2)")
    ev = _dense_eigs(op)
    if count is not None:
        ev = ev[:count]
    cls = classify(ev, theta, tol_b, tol_c)
    stability = {}
    if stability_delta and op.spec is not None and any(c is EigClass.BOUND for c in cls):
        shifted = theta + 1j * stability_delta
        if shifted.imag < math.pi / 2:
            ev2 = _dense_eigs(build_radial(op.spec, op.ell, op.grid, shifted))
            for i, (lam, c) in enumerate(zip(ev, cls)):
                if c is EigClass.BOUND:
                    stability[i] = float(np.min(np.abs(ev2 - lam)))
    return SpectrumReport(ev, cls, theta, stability, tol_b, tol_c)


# --- dilatation analyticity -----------------------------------------------------


@dataclass
class ConditionReport:
    C: float
    beta_max: float
    far_radii: np.ndarray
    sup_far: np.ndarray  # sup over the sector of |V(r e^{i phi})|
    near_radii: np.ndarray
    sup_near: np.ndarray  # sup over the sector of r^{2 - eps}|V(r e^{i phi})|
    eps: float
    passes_II: bool
    passes_III: bool
    condition_I: str = "analytic: exp(-C/z)/z is holomorphic on Re z > 0"

    @property
    def passed(self) -> bool:
        return self.passes_II and self.passes_III


def _decreasing_to_zero(values: np.ndarray, floor: float) -> bool:
    return bool(np.all(np.diff(values) <= 0) and values[-1] < floor)


def check_dilatation_conditions(
    spec: PotentialSpec,
    beta_max: float,
    samples: dict | None = None,
    eps: float = 0.5,
) -> ConditionReport:
    """Sector decay at infinity and ``r^{2-eps}`` flatness at the origin along complex rays.

    ``samples`` may override ``far`` and ``near`` radii (ordered outward and
    inward respectively), ``n_phi`` and the ``floor`` the last sup must beat.
    """
    if spec.family is not Family.SOFTENED:
        raise ConfigError("dilatation check is implemented for the softened family")
    if not 0 <= beta_max < math.pi / 2:
        raise SectorViolationError("beta_max must lie in [0, pi/2)")
    samples = samples or {}
    far = np.asarray(samples.get("far", [1e1, 1e2, 1e3, 1e4]), dtype=float)
    near = np.asarray(samples.get("near", [1e-1, 3e-2, 1e-2, 3e-3, 1e-3]), dtype=float)
    floor = float(samples.get("floor", 1e-3))
    phis = np.linspace(-beta_max, beta_max, int(samples.get("n_phi", 33)))
    rays = np.exp(1j * phis)
    sup_far = np.array([np.max(np.abs(evaluate(spec, r * rays))) for r in far])
    sup_near = np.array([r ** (2 - eps) * np.max(np.abs(evaluate(spec, r * rays))) for r in near])
    return ConditionReport(
        C=spec.C,
        beta_max=beta_max,
        far_radii=far,
        sup_far=sup_far,
        near_radii=near,
        sup_near=sup_near,
        eps=eps,
        passes_II=_decreasing_to_zero(sup_far, floor),
        passes_III=_decreasing_to_zero(sup_near, floor),
    )


# --- C -> 0 study -----------------------------------------------------------------


def eigenvalue_limit_study(C_list: Sequence[float], ell: int, grid: RadialGrid) -> list:
    """Rows ``(C, E_1(C), E_1(C) + 1/4)`` on one shared grid; ``C = 0`` means Coulomb."""
    Cs = [float(c) for c in C_list]
    if any(b >= a for a, b in zip(Cs, Cs[1:])):
        raise ConfigError("C_list must be strictly decreasing")
    if any(c < 0 for c in Cs):
        raise ConfigError("C values must be nonnegative")
    positive = [c for c in Cs if c > 0]
    if positive and grid.h > min(min(positive), 1.0) / 20:
        raise GridResolutionError(
            f"h = {grid.h} does not resolve C = {min(positive)}; need h <= {min(min(positive), 1.0) / 20}"
        )
    rows = []
    for C in Cs:
        spec = PotentialSpec.coulomb() if C == 0 else PotentialSpec.softened(C)
        E1 = bound_states(build_radial(spec, ell, grid), 1)[0]
        rows.append((C, E1, E1 + 0.25))
    return rows


def spectrum_rows(C: float, report: SpectrumReport, ell: int) -> list:
    """CSV rows ``C,ell,theta_im,index,re,im,class``."""
    return [
        (C, ell, report.theta.imag, i, lam.real, lam.imag, c.value)
        for i, (lam, c) in enumerate(zip(report.eigenvalues, report.classification))
    ]
