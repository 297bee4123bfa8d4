"""Radial potential family and its moving-nucleus / multi-center evaluation.

Three members share one interface:

* Coulomb        ``Z / r``
* Yukawa         ``Z * alpha**2 * exp(-c r) / r``
* softened       ``Z * exp(-C / r) / r``  (extended by 0 at ``r = 0``)

Functions accept scalars or numpy arrays. Complex radii are accepted by
:func:`evaluate` so that complex-scaled operators can reuse it.
"""
from __future__ import annotations

import enum
import json
import math
from dataclasses import dataclass, field
from pathlib import Path
from typing import Sequence

import numpy as np

from .errors import (
    ConfigError,
    OutOfSpanError,
    SingularEvaluationError,
    UnboundedPotentialError,
)

# exp(-745) is the last normal double; beyond it the factor is flushed to 0
EXP_CUTOFF = 745.0


class Family(str, enum.Enum):
    COULOMB = "coulomb"
    YUKAWA = "yukawa"
    SOFTENED = "softened"


@dataclass(frozen=True)
class PotentialSpec:
    family: Family
    C: float = 0.0
    alpha: float = 1.0
    c: float = 1.0
    Z: float = 1.0

    def __post_init__(self):
        object.__setattr__(self, "family", Family(self.family))
        if not self.Z > 0:
            raise ConfigError(f"charge Z must be positive, got {self.Z}")
        if self.family is Family.SOFTENED and not self.C > 0:
            raise ConfigError(f"softening length C must be positive, got {self.C}")
        if self.family is Family.YUKAWA and not self.c > 0:
            raise ConfigError(f"Yukawa screening c must be positive, got {self.c}")

    @classmethod
    def coulomb(cls, Z: float = 1.0) -> "PotentialSpec":
        return cls(Family.COULOMB, Z=Z)

    @classmethod
    def yukawa(cls, alpha: float = 1.0, c: float = 1.0, Z: float = 1.0) -> "PotentialSpec":
        return cls(Family.YUKAWA, alpha=alpha, c=c, Z=Z)

    @classmethod
    def softened(cls, C: float, Z: float = 1.0) -> "PotentialSpec":
        return cls(Family.SOFTENED, C=C, Z=Z)

    @property
    def has_pole(self) -> bool:
        return self.family is not Family.SOFTENED


def _scalar_out(value, like):
    return value[()] if np.ndim(like) == 0 else value


def _decay(C: float, r: np.ndarray) -> np.ndarray:
    """``exp(-C/r)`` with the origin and deep underflow mapped to exactly 0."""
    out = np.zeros(r.shape, dtype=np.result_type(r.dtype, np.float64))
    nz = r != 0
    arg = C / r[nz]
    keep = arg.real <= EXP_CUTOFF
    vals = np.zeros(arg.shape, dtype=out.dtype)
    vals[keep] = np.exp(-arg[keep])
    out[nz] = vals
    return out


def _check_radius(spec: PotentialSpec, r: np.ndarray) -> None:
    if not np.iscomplexobj(r) and np.any(r < 0):
        raise ConfigError("radius must be nonnegative")
    if spec.has_pole and np.any(r == 0):
        raise SingularEvaluationError(f"{spec.family.value} potential is singular at r = 0")


def evaluate(spec: PotentialSpec, r):
    """Potential value at radius ``r`` (scalar or array, real >= 0 or complex)."""
    ra = np.asarray(r)
    if not np.iscomplexobj(ra):
        ra = ra.astype(np.float64)
    _check_radius(spec, ra)
    if spec.family is Family.COULOMB:
        out = spec.Z / ra
    elif spec.family is Family.YUKAWA:
        out = spec.Z * spec.alpha**2 * np.exp(-spec.c * ra) / ra
    else:
        out = np.zeros(ra.shape, dtype=np.result_type(ra.dtype, np.float64))
        nz = ra != 0
        out[nz] = spec.Z * _decay(spec.C, ra[nz]) / ra[nz]
    return _scalar_out(out, r)


def radial_derivative(spec: PotentialSpec, r):
    """dV/dr. For the softened member this is 0 at the origin."""
    ra = np.asarray(r, dtype=np.float64)
    _check_radius(spec, ra)
    if spec.family is Family.COULOMB:
        out = -spec.Z / ra**2
    elif spec.family is Family.YUKAWA:
        out = -spec.Z * spec.alpha**2 * np.exp(-spec.c * ra) * (1 + spec.c * ra) / ra**2
    else:
        out = np.zeros(ra.shape)
        nz = ra > 0
        rr = ra[nz]
        out[nz] = spec.Z * _decay(spec.C, rr) * (spec.C - rr) / rr**3
    return _scalar_out(out, r)


def grad_component(spec: PotentialSpec, x, j: int):
    """Cartesian derivative dV/dx_j at ``x`` (shape (3,) or (..., 3)); ``j`` is 0-based.

    Softened: ``Z e^{-C/|x|} (C x_j/|x|^4 - x_j/|x|^3)``, 0 at the origin.
    """
    xa = np.asarray(x, dtype=np.float64)
    if xa.shape[-1] != 3 or j not in (0, 1, 2):
        raise ConfigError("x must have a trailing axis of length 3 and j in {0, 1, 2}")
    r = np.linalg.norm(xa, axis=-1)
    _check_radius(spec, r)
    xj = xa[..., j]
    if spec.family is Family.SOFTENED:
        out = np.zeros(r.shape)
        nz = r > 0
        rr, xx = r[nz], xj[nz]
        e = _decay(spec.C, rr)
        out[nz] = spec.Z * (spec.C * xx / rr**4 - xx / rr**3) * e
        return _scalar_out(out, r)
    return radial_derivative(spec, r) * xj / r


def laplacian(spec: PotentialSpec, r):
    """Laplacian of the softened potential in 3D: ``Z e^{-C/r} (C^2/r^5 - 2C/r^4)``.

    Tends to 0 as ``r -> 0+`` and decays like ``r^-4`` at infinity.
    """
    if spec.family is not Family.SOFTENED:
        raise ConfigError("closed-form Laplacian is provided for the softened family only")
    ra = np.asarray(r, dtype=np.float64)
    if np.any(ra <= 0):
        raise ConfigError("laplacian requires r > 0")
    C = spec.C
    # factored so the exponential multiplies last
    out = spec.Z * ((C * C / ra**5 - 2 * C / ra**4) * _decay(C, ra))
    return _scalar_out(out, r)


def sup_norm(spec: PotentialSpec, r_min: float = 0.0) -> float:
    """Supremum of ``|V|`` over ``r >= r_min``.

    The softened member attains ``Z / (e C)`` at ``r = C``. Yukawa needs a
    positive cutoff ``r_min``; Coulomb is always rejected.
    """
    if spec.family is Family.COULOMB:
        raise UnboundedPotentialError("Coulomb potential is unbounded")
    if spec.family is Family.YUKAWA:
        if not r_min > 0:
            raise UnboundedPotentialError("Yukawa potential needs a cutoff r_min > 0")
        return float(evaluate(spec, r_min))
    if r_min <= spec.C:
        return spec.Z / (math.e * spec.C)
    return float(evaluate(spec, r_min))


def sup_difference(a: PotentialSpec, b: PotentialSpec, r_max: float = 200.0, n: int = 400_001) -> float:
    """Dense-grid estimate of ``sup_r |V_a(r) - V_b(r)|`` for bounded members."""
    r = np.linspace(0.0, r_max, n)
    return float(np.max(np.abs(evaluate(a, r) - evaluate(b, r))))


def radial_fd_derivative(spec: PotentialSpec, r: float, order: int, step: float) -> float:
    """Central finite difference of ``d^k V / dr^k`` with nodes ``r + (i - k/2) step``."""
    k = int(order)
    offs = (np.arange(k + 1) - k / 2) * step
    if r + offs[0] < 0:
        raise ConfigError("stencil reaches negative radius")
    coeff = np.array([(-1) ** (k - i) * math.comb(k, i) for i in range(k + 1)], dtype=float)
    return float(np.dot(coeff, evaluate(spec, r + offs)) / step**k)


def radial_momentum_residual(
    spec: PotentialSpec, r_samples: Sequence[float], derivative: str = "analytic", step: float = 1e-5
) -> float:
    """max |r d/dr (r V) - C V| over the samples; exact eigenrelation for the softened member."""
    if spec.family is not Family.SOFTENED:
        raise ConfigError("eigenrelation holds for the softened family only")
    r = np.asarray(r_samples, dtype=np.float64)
    if np.any(r <= 0):
        raise ConfigError("samples must be positive")
    V = evaluate(spec, r)
    if derivative == "analytic":
        d_rV = V + r * radial_derivative(spec, r)
    elif derivative == "fd":
        d_rV = ((r + step) * evaluate(spec, r + step) - (r - step) * evaluate(spec, r - step)) / (2 * step)
    else:
        raise ConfigError(f"unknown derivative mode {derivative!r}")
    return float(np.max(np.abs(r * d_rV - spec.C * V)))


@dataclass(frozen=True)
class NucleusTrajectory:
    """Continuous piecewise-linear path through ``(t, position)`` knots."""

    times: tuple
    positions: np.ndarray = field(repr=False)

    def __post_init__(self):
        t = np.asarray(self.times, dtype=np.float64).ravel()
        p = np.asarray(self.positions, dtype=np.float64).reshape(-1, 3)
        if t.size == 0 or t.size != p.shape[0]:
            raise ConfigError("trajectory needs one 3-vector per knot time")
        if np.any(np.diff(t) <= 0):
            raise ConfigError("knot times must be strictly increasing")
        if not (np.all(np.isfinite(t)) and np.all(np.isfinite(p))):
            raise ConfigError("knots must be finite")
        p.setflags(write=False)
        object.__setattr__(self, "times", tuple(t.tolist()))
        object.__setattr__(self, "positions", p)

    @classmethod
    def stationary(cls, position=(0.0, 0.0, 0.0), t0: float = 0.0, t1: float = 1e6):
        return cls((t0, t1), [position, position])

    @classmethod
    def from_function(cls, fn, t0: float, t1: float, n_knots: int = 2001):
        ts = np.linspace(t0, t1, n_knots)
        return cls(ts, [fn(t) for t in ts])

    @classmethod
    def from_records(cls, records) -> "NucleusTrajectory":
        try:
            return cls([rec["t"] for rec in records], [rec["r"] for rec in records])
        except (KeyError, TypeError) as exc:
            raise ConfigError(f"malformed trajectory record: {exc}") from exc

    @classmethod
    def load(cls, path) -> "NucleusTrajectory":
        with open(path) as fh:
            return cls.from_records(json.load(fh))

    def to_records(self) -> list:
        return [{"t": t, "r": [float(v) for v in p]} for t, p in zip(self.times, self.positions)]

    def save(self, path) -> None:
        Path(path).write_text(json.dumps(self.to_records(), indent=1))

    @property
    def span(self) -> tuple:
        return self.times[0], self.times[-1]

    def __call__(self, t: float) -> np.ndarray:
        t0, t1 = self.span
        if not t0 <= t <= t1:
            raise OutOfSpanError(f"t = {t} outside trajectory span [{t0}, {t1}]")
        if len(self.times) == 1:
            return self.positions[0].copy()
        ts = np.asarray(self.times)
        return np.array([np.interp(t, ts, self.positions[:, a]) for a in range(3)])


def eval_moving(spec: PotentialSpec, x, t: float, traj: NucleusTrajectory):
    """``V(|x - r(t)|)`` for points ``x`` of shape (3,) or (..., 3)."""
    d = np.asarray(x, dtype=np.float64) - traj(t)
    return evaluate(spec, np.linalg.norm(d, axis=-1))


def eval_multicenter(centers, X, t: float) -> float:
    """Attractive multi-nucleus potential ``-sum_j sum_m Z_m V_m(|x_j - r_m(t)|)``.

    ``centers`` is a sequence of ``(PotentialSpec, NucleusTrajectory)``; the
    charge of nucleus m is carried by its spec's ``Z``.
    """
    X = np.atleast_2d(np.asarray(X, dtype=np.float64))
    total = 0.0
    for spec, traj in centers:
        total -= float(np.sum(eval_moving(spec, X, t, traj)))
    return total
