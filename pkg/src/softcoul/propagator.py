"""Time propagation for ``H(t) = -Laplacian - 1/|x| + V_P(x - r(t))`` on a periodic 3D grid.

Nodes sit at ``-box/2 + h (i + 1/2)`` (n even), so no node hits the
Coulomb pole at the origin. The reference propagator is a Strang split
step with the kinetic factor applied in frequency space. The Dyson
propagator treats the bounded softened term as the perturbation in the
interaction picture of ``H0 = -Laplacian - 1/|x|``.

Two ways to evaluate the Dyson terms are offered:

* ``"product"`` (default): the exact order-by-order expansion in ``V_P`` of
  the same split-step product the reference uses, so the j-th term is the
  j-fold time-ordered integral discretized by the step rule itself.
* ``"simplex"``: iterated Gauss-Legendre over the time simplex with
  ``exp(-i tau H0)`` realized by Coulomb-only split steps. Cost grows like
  ``nodes**J``; its accuracy is capped by the quadrature, not by J.
"""
from __future__ import annotations

import enum
import json
import math
import warnings
from dataclasses import dataclass, field, replace
from functools import cached_property
from pathlib import Path

import numpy as np
import scipy.fft as sfft
from scipy.sparse.linalg import LinearOperator, eigsh, gmres

from .errors import (
    BlowUpError,
    BoundaryContaminationWarning,
    ConfigError,
    GridResolutionError,
    NonConvergenceError,
    TruncationBudgetError,
)
from .potentials import NucleusTrajectory, PotentialSpec, evaluate, sup_norm

MAX_DYSON_ORDER = 6
SIMPLEX_MAX_ORDER = 3
BOUNDARY_MASS_LIMIT = 1e-6
# blow-up once <x^2> exceeds this share of the uniform-box value box^2/4
BOX_CAPACITY = 0.5


class GroundState(str, enum.Enum):
    HYDROGEN_EXP = "HydrogenExp"  # exp(-r)
    HYDROGEN_TRUE = "HydrogenTrue"  # exp(-r/2), eigenvalue -1/4 of H0


@dataclass(frozen=True)
class Grid3D:
    n: int = 48
    box: float = 24.0

    def __post_init__(self):
        if self.n < 8:
            raise ConfigError("Grid3D needs n >= 8")
        if self.n % 2:
            raise ConfigError("n must be even so that no node sits at the origin")
        if not self.box > 0:
            raise ConfigError("box must be positive")

    @property
    def h(self) -> float:
        return self.box / self.n

    @property
    def dV(self) -> float:
        return self.h**3

    @cached_property
    def axis(self) -> np.ndarray:
        return -0.5 * self.box + self.h * (np.arange(self.n) + 0.5)

    @cached_property
    def coords(self) -> tuple:
        a = self.axis
        return a[:, None, None], a[None, :, None], a[None, None, :]

    @cached_property
    def r2(self) -> np.ndarray:
        X, Y, Z = self.coords
        return X**2 + Y**2 + Z**2

    @cached_property
    def r(self) -> np.ndarray:
        return np.sqrt(self.r2)

    @cached_property
    def k2(self) -> np.ndarray:
        k = 2 * np.pi * np.fft.fftfreq(self.n, d=self.h)
        return k[:, None, None] ** 2 + k[None, :, None] ** 2 + k[None, None, :] ** 2

    @cached_property
    def coulomb(self) -> np.ndarray:
        return -1.0 / self.r


@dataclass
class WaveFunction3D:
    amplitudes: np.ndarray
    grid: Grid3D

    def __post_init__(self):
        a = np.asarray(self.amplitudes, dtype=np.complex128)
        if a.shape != (self.grid.n,) * 3:
            raise ConfigError(f"amplitudes must have shape {(self.grid.n,) * 3}")
        if not np.all(np.isfinite(a)):
            raise ConfigError("amplitudes must be finite")
        self.amplitudes = a

    def norm(self) -> float:
        return math.sqrt(float(np.sum(np.abs(self.amplitudes) ** 2)) * self.grid.dV)

    def normalized(self) -> "WaveFunction3D":
        nrm = self.norm()
        if nrm == 0:
            raise ConfigError("cannot normalize the zero function")
        return WaveFunction3D(self.amplitudes / nrm, self.grid)

    def inner(self, other: "WaveFunction3D") -> complex:
        return complex(np.vdot(self.amplitudes, other.amplitudes)) * self.grid.dV

    def x2(self) -> float:
        """<|x|^2> (not divided by the norm)."""
        return float(np.sum(self.grid.r2 * np.abs(self.amplitudes) ** 2)) * self.grid.dV

    def distance(self, other: "WaveFunction3D") -> float:
        return WaveFunction3D(self.amplitudes - other.amplitudes, self.grid).norm()


def make_groundstate(grid: Grid3D, kind=GroundState.HYDROGEN_TRUE, normalize: bool = True) -> WaveFunction3D:
    kind = GroundState(kind)
    if grid.h > 0.5 or grid.box < 20:
        raise GridResolutionError(f"ground state needs h <= 0.5 and box >= 20, got h={grid.h}, box={grid.box}")
    decay = 1.0 if kind is GroundState.HYDROGEN_EXP else 0.5
    psi = WaveFunction3D(np.exp(-decay * grid.r).astype(np.complex128), grid)
    return psi.normalized() if normalize else psi


def discrete_groundstate(grid: Grid3D, tol: float = 1e-12) -> tuple:
    """Lowest eigenpair of the grid ``H0`` (spectral kinetic term) by Lanczos.

    Unlike the sampled ``exp(-r/2)`` this state is stationary under the
    reference propagator up to splitting error.
    """
    n3 = grid.n**3
    shape = (grid.n,) * 3

    def matvec(v):
        a = v.reshape(shape)
        return (sfft.ifftn(grid.k2 * sfft.fftn(a, workers=-1), workers=-1).real + grid.coulomb * a).ravel()

    op = LinearOperator((n3, n3), matvec=matvec, dtype=np.float64)
    v0 = np.exp(-0.5 * grid.r).ravel()
    w, vecs = eigsh(op, k=1, which="SA", v0=v0, tol=tol)
    psi = WaveFunction3D(vecs[:, 0].reshape(shape).astype(np.complex128), grid).normalized()
    # fix the overall sign so the state is positive at the center
    if psi.amplitudes.real.sum() < 0:
        psi = WaveFunction3D(-psi.amplitudes, grid)
    return float(w[0]), psi


def gaussian_packet(grid: Grid3D, sigma: float = 1.0, center=(0.0, 0.0, 0.0)) -> WaveFunction3D:
    X, Y, Z = grid.coords
    d2 = (X - center[0]) ** 2 + (Y - center[1]) ** 2 + (Z - center[2]) ** 2
    return WaveFunction3D(np.exp(-d2 / (2 * sigma**2)).astype(np.complex128), grid).normalized()


@dataclass(frozen=True)
class PropagationConfig:
    grid: Grid3D = field(default_factory=Grid3D)
    dt: float = 0.005
    t_final: float = 1.0
    C: float | None = 1.0  # None switches the softened term off
    dyson_order: int = 0
    nodes: int = 8
    trajectory: NucleusTrajectory | None = None  # None: nucleus fixed at the origin
    scheme: str = "strang"
    diagnostics_stride: int = 20

    def __post_init__(self):
        if not self.dt > 0:
            raise ConfigError("dt must be positive")
        if not self.t_final >= 0:
            raise ConfigError("t_final must be nonnegative")
        if self.C is not None and not self.C > 0:
            raise ConfigError("C must be positive (or None to switch V_P off)")
        if not 0 <= self.dyson_order <= MAX_DYSON_ORDER:
            raise ConfigError(f"dyson_order must lie in [0, {MAX_DYSON_ORDER}]")
        if self.nodes < 1:
            raise ConfigError("nodes must be positive")
        if self.scheme not in ("strang", "crank-nicolson"):
            raise ConfigError(f"unknown scheme {self.scheme!r}")
        if self.diagnostics_stride < 1:
            raise ConfigError("diagnostics_stride must be positive")

    @property
    def spec(self) -> PotentialSpec | None:
        return None if self.C is None else PotentialSpec.softened(self.C)

    def nucleus(self, t: float) -> np.ndarray:
        if self.trajectory is None:
            return np.zeros(3)
        return self.trajectory(t)

    @classmethod
    def from_json(cls, path) -> "PropagationConfig":
        """``{grid: {n, box}, dt, t_final, C, dyson_order, trajectory_file, diagnostics_stride}``."""
        path = Path(path)
        if not path.is_file():
            raise ConfigError(f"config file not found: {path}")
        try:
            raw = json.loads(path.read_text())
        except json.JSONDecodeError as exc:
            raise ConfigError(f"{path}: invalid JSON ({exc})") from exc
        known = {"grid", "dt", "t_final", "C", "dyson_order", "trajectory_file", "diagnostics_stride", "scheme", "nodes"}
        extra = set(raw) - known
        if extra:
            raise ConfigError(f"unknown config fields: {sorted(extra)}")
        traj = None
        if raw.get("trajectory_file"):
            tpath = Path(raw["trajectory_file"])
            if not tpath.is_absolute():
                tpath = path.parent / tpath
            if not tpath.is_file():
                raise ConfigError(f"trajectory file not found: {tpath}")
            traj = NucleusTrajectory.load(tpath)
        g = raw.get("grid", {})
        kw = {k: raw[k] for k in ("dt", "t_final", "C", "dyson_order", "diagnostics_stride", "scheme", "nodes") if k in raw}
        try:
            return cls(grid=Grid3D(int(g.get("n", 48)), float(g.get("box", 24.0))), trajectory=traj, **kw)
        except TypeError as exc:
            raise ConfigError(str(exc)) from exc


def fd_laplacian(a: np.ndarray, h: float) -> np.ndarray:
    """7-point Laplacian with zero values outside the box."""
    p = np.pad(a, 1)
    out = -6.0 * a
    out = out + p[2:, 1:-1, 1:-1] + p[:-2, 1:-1, 1:-1]
    out = out + p[1:-1, 2:, 1:-1] + p[1:-1, :-2, 1:-1]
    out = out + p[1:-1, 1:-1, 2:] + p[1:-1, 1:-1, :-2]
    return out / (h * h)


class Propagator:
    """Reference propagator for one configuration."""

    def __init__(self, config: PropagationConfig):
        self.config = config
        self.grid = config.grid
        self._kin = {}
        self._coulomb_half = {}

    def softened(self, t: float) -> np.ndarray | None:
        spec = self.config.spec
        if spec is None:
            return None
        X, Y, Z = self.grid.coords
        c = self.config.nucleus(t)
        return evaluate(spec, np.sqrt((X - c[0]) ** 2 + (Y - c[1]) ** 2 + (Z - c[2]) ** 2))

    def potential(self, t: float) -> np.ndarray:
        vp = self.softened(t)
        return self.grid.coulomb if vp is None else self.grid.coulomb + vp

    def kinetic(self, a: np.ndarray, dt: float) -> np.ndarray:
        if dt not in self._kin:
            self._kin[dt] = np.exp(-1j * dt * self.grid.k2)
        return sfft.ifftn(self._kin[dt] * sfft.fftn(a, workers=-1), workers=-1)

    def coulomb_step(self, a: np.ndarray, dt: float) -> np.ndarray:
        """Split step of ``H0`` alone."""
        if dt not in self._coulomb_half:
            self._coulomb_half[dt] = np.exp(-0.5j * dt * self.grid.coulomb)
        ph = self._coulomb_half[dt]
        return ph * self.kinetic(ph * a, dt)

    def apply_h(self, a: np.ndarray, t: float) -> np.ndarray:
        """Spectral kinetic term plus the full potential."""
        return sfft.ifftn(self.grid.k2 * sfft.fftn(a, workers=-1), workers=-1) + self.potential(t) * a

    def step(self, a: np.ndarray, t: float, dt: float | None = None) -> np.ndarray:
        """One step ``t -> t + dt``; negative ``dt`` runs backward with conjugated factors."""
        dt = self.config.dt if dt is None else dt
        if self.config.scheme == "crank-nicolson":
            return self._cn_step(a, t, dt)
        ph = np.exp(-0.5j * dt * self.potential(t + 0.5 * dt))
        return ph * self.kinetic(ph * a, dt)

    def _cn_step(self, a: np.ndarray, t: float, dt: float) -> np.ndarray:
        shape = a.shape
        tm = t + 0.5 * dt

        def lhs(v):
            v = v.reshape(shape)
            return (v + 0.5j * dt * self.apply_h(v, tm)).ravel()

        op = LinearOperator((a.size, a.size), matvec=lhs, dtype=np.complex128)
        rhs = (a - 0.5j * dt * self.apply_h(a, tm)).ravel()
        sol, info = gmres(op, rhs, x0=a.ravel(), rtol=1e-13, atol=0.0, restart=40, maxiter=200)
        if info != 0:
            raise NonConvergenceError(f"Crank-Nicolson solve did not converge (info={info})")
        return sol.reshape(shape)

    def evolve(self, psi: WaveFunction3D, t0: float, t1: float) -> WaveFunction3D:
        m = _n_steps(t1 - t0, self.config.dt)
        if m == 0:
            return WaveFunction3D(psi.amplitudes.copy(), self.grid)
        d = (t1 - t0) / m
        a = psi.amplitudes
        for i in range(m):
            a = self.step(a, t0 + i * d, d)
        return WaveFunction3D(a, self.grid)

    def free_evolve(self, a: np.ndarray, tau: float) -> np.ndarray:
        """``exp(-i tau H0)`` by Coulomb-only split steps of size about dt."""
        m = _n_steps(tau, self.config.dt)
        if m == 0:
            return a
        d = tau / m
        for _ in range(m):
            a = self.coulomb_step(a, d)
        return a


def _n_steps(span: float, dt: float) -> int:
    return int(math.ceil(abs(span) / dt - 1e-9)) if span else 0


def reference_step(psi: WaveFunction3D, t: float, config: PropagationConfig, backward: bool = False) -> WaveFunction3D:
    """One reference step from ``t``; ``backward`` steps to ``t - dt``."""
    # a -dt step from t uses the midpoint t - dt/2, so it inverts the forward step from t - dt
    dt = -config.dt if backward else config.dt
    return WaveFunction3D(Propagator(config).step(psi.amplitudes, t, dt), config.grid)


# --- Dyson series ---------------------------------------------------------------


def truncation_bound(span: float, C: float, J: int, Z: float = 1.0) -> float:
    """``sum_{j > J} x^j / j!`` with ``x = span * sup|V_P| = span Z / (e C)``."""
    x = abs(span) * sup_norm(PotentialSpec.softened(C, Z))
    head = sum(x**j / math.factorial(j) for j in range(J + 1))
    return max(math.exp(x) - head, 0.0)


def _kick(terms: list, V: np.ndarray, dt: float) -> list:
    # order-by-order product of exp(-i dt V / 2) with the series sum_j terms[j]
    A = -0.5j * dt * V
    out = []
    for j in range(len(terms)):
        acc = terms[j].copy()
        fac = None
        for m in range(1, j + 1):
            fac = A / m if fac is None else fac * A / m
            acc += fac * terms[j - m]
        out.append(acc)
    return out


def _terms_product(prop: Propagator, a0: np.ndarray, s: float, t: float, J: int) -> list:
    m = _n_steps(t - s, prop.config.dt)
    terms = [a0.copy()] + [np.zeros_like(a0) for _ in range(J)]
    if m == 0:
        return terms
    d = (t - s) / m
    for i in range(m):
        V = prop.softened(s + (i + 0.5) * d)
        if V is not None and J > 0:
            terms = _kick(terms, V, d)
        terms = [prop.coulomb_step(q, d) for q in terms]
        if V is not None and J > 0:
            terms = _kick(terms, V, d)
    return terms


def _terms_simplex(prop: Propagator, a0: np.ndarray, s: float, t: float, J: int, nodes: int) -> list:
    xg, wg = np.polynomial.legendre.leggauss(nodes)

    def G(j, tau):
        # j-th term of the series at time tau, already carried to tau by H0
        if j == 0:
            return prop.free_evolve(a0, tau - s)
        w = 0.5 * (tau - s) * wg
        acc = np.zeros_like(a0)
        for tn, wn in zip(0.5 * (tau + s) + 0.5 * (tau - s) * xg, w):
            acc += wn * prop.free_evolve(prop.softened(tn) * G(j - 1, tn), tau - tn)
        return -1j * acc

    if prop.config.spec is None:
        return [G(0, t)] + [np.zeros_like(a0) for _ in range(J)]
    return [G(j, t) for j in range(J + 1)]


def dyson_terms(
    psi0: WaveFunction3D,
    s: float,
    t: float,
    config: PropagationConfig,
    J: int | None = None,
    quadrature: str = "product",
    ceiling: float | None = None,
) -> list:
    """Terms ``j = 0..J`` of the interaction-picture series carried back to the lab frame at ``t``."""
    J = config.dyson_order if J is None else int(J)
    if not 0 <= J <= MAX_DYSON_ORDER:
        raise ConfigError(f"J must lie in [0, {MAX_DYSON_ORDER}]")
    if ceiling is not None and config.C is not None:
        bound = truncation_bound(t - s, config.C, J)
        if bound > ceiling:
            raise TruncationBudgetError(f"remainder bound {bound:.3g} exceeds ceiling {ceiling:.3g}")
    prop = Propagator(config)
    if quadrature == "product":
        arrs = _terms_product(prop, psi0.amplitudes, s, t, J)
    elif quadrature == "simplex":
        if J > SIMPLEX_MAX_ORDER:
            warnings.warn(
                f"simplex quadrature at J = {J} is very expensive; prefer reference propagation",
                RuntimeWarning,
                stacklevel=2,
            )
        arrs = _terms_simplex(prop, psi0.amplitudes, s, t, J, config.nodes)
    else:
        raise ConfigError(f"unknown quadrature {quadrature!r}")
    return [WaveFunction3D(a, config.grid) for a in arrs]


def dyson_propagate(psi0: WaveFunction3D, s: float, t: float, config: PropagationConfig, **kw) -> WaveFunction3D:
    terms = dyson_terms(psi0, s, t, config, **kw)
    total = terms[0].amplitudes.copy()
    for q in terms[1:]:
        total += q.amplitudes
    return WaveFunction3D(total, config.grid)


# --- diagnostics -----------------------------------------------------------------


def boundary_mass(psi: WaveFunction3D, layers: int = 2) -> float:
    a = np.abs(psi.amplitudes) ** 2
    inner = a[layers:-layers, layers:-layers, layers:-layers]
    return float(np.sum(a) - np.sum(inner)) * psi.grid.dV


def y_norm(psi: WaveFunction3D) -> float:
    """``sqrt(||(H0 + x^2) psi||^2 + ||psi||^2)`` with a finite-difference Laplacian."""
    g = psi.grid
    if boundary_mass(psi) > BOUNDARY_MASS_LIMIT:
        warnings.warn("wave function has mass near the box boundary", BoundaryContaminationWarning, stacklevel=2)
    a = psi.amplitudes
    Ha = -fd_laplacian(a, g.h) + (g.coulomb + g.r2) * a
    return math.sqrt((float(np.sum(np.abs(Ha) ** 2)) * g.dV) + psi.norm() ** 2)


@dataclass(frozen=True)
class DiagnosticRow:
    t: float
    norm: float
    x2: float
    ynorm: float


def evolve_with_diagnostics(config: PropagationConfig, psi0: WaveFunction3D, t0: float = 0.0) -> list:
    """Reference propagation over ``[t0, t0 + t_final]``, sampling every ``diagnostics_stride`` steps."""
    prop = Propagator(config)
    capacity = BOX_CAPACITY * config.grid.box**2 / 4
    m = _n_steps(config.t_final, config.dt)
    d = config.t_final / m if m else config.dt
    a = psi0.amplitudes

    def sample(t, arr):
        psi = WaveFunction3D(arr, config.grid) if np.all(np.isfinite(arr)) else None
        if psi is None:
            raise BlowUpError(f"non-finite amplitudes at t = {t}")
        x2 = psi.x2()
        if x2 > capacity:
            raise BlowUpError(f"<x^2> = {x2:.3g} exceeds box capacity {capacity:.3g} at t = {t}")
        with warnings.catch_warnings():
            warnings.simplefilter("ignore", BoundaryContaminationWarning)
            yn = y_norm(psi)
        return DiagnosticRow(t, psi.norm(), x2, yn)

    rows = [sample(t0, a)]
    for i in range(m):
        a = prop.step(a, t0 + i * d, d)
        if (i + 1) % config.diagnostics_stride == 0 or i == m - 1:
            rows.append(sample(t0 + (i + 1) * d, a))
    return rows


def with_changes(config: PropagationConfig, **kw) -> PropagationConfig:
    return replace(config, **kw)
