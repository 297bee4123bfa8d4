import math

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from softcoul import potentials as P
from softcoul.errors import ConfigError, OutOfSpanError, SingularEvaluationError, UnboundedPotentialError
from softcoul.potentials import NucleusTrajectory, PotentialSpec
from softcoul.selftest import fd_gradient, fd_laplacian_3d

E1 = math.exp(-1)
Cs = st.floats(0.05, 5.0)
radii = st.floats(0.2, 20.0)


# -- closed-form values --------------------------------------------------------


def test_softened_values():
    s = PotentialSpec.softened(1.0)
    assert P.evaluate(s, 1.0) == pytest.approx(0.3678794, abs=1e-7)
    assert P.evaluate(s, 0.0) == 0.0
    assert P.evaluate(PotentialSpec.softened(1e-12), 2.0) == pytest.approx(0.5, rel=1e-11)


def test_array_and_scalar_shapes():
    s = PotentialSpec.softened(1.0)
    out = P.evaluate(s, [0.0, 1.0, 2.0])
    assert out.shape == (3,)
    assert np.ndim(P.evaluate(s, 0.0)) == 0


def test_underflow_flushed_to_zero():
    s = PotentialSpec.softened(1.0)
    assert P.evaluate(s, 1.0 / 800) == 0.0
    assert np.all(np.isfinite(P.radial_derivative(s, np.geomspace(1e-8, 1, 50))))


@pytest.mark.parametrize("spec", [PotentialSpec.coulomb(), PotentialSpec.yukawa()])
def test_pole_at_origin_is_an_error(spec):
    with pytest.raises(SingularEvaluationError):
        P.evaluate(spec, 0.0)


@pytest.mark.parametrize(
    "kwargs", [dict(family="softened", C=0.0), dict(family="yukawa", c=0.0), dict(family="coulomb", Z=-1.0)]
)
def test_spec_validation(kwargs):
    with pytest.raises(ConfigError):
        PotentialSpec(**kwargs)


def test_sup_norm_values():
    assert P.sup_norm(PotentialSpec.softened(1.0)) == pytest.approx(E1, rel=1e-15)
    assert P.sup_norm(PotentialSpec.softened(2.0)) == pytest.approx(0.1839397, abs=1e-7)
    assert P.sup_norm(PotentialSpec.softened(1.0, Z=5.0)) == pytest.approx(5 * E1)
    with pytest.raises(UnboundedPotentialError):
        P.sup_norm(PotentialSpec.coulomb())
    with pytest.raises(UnboundedPotentialError):
        P.sup_norm(PotentialSpec.yukawa())


def test_sup_norm_matches_dense_grid():
    for C in (0.5, 1.0, 2.0):
        r = np.linspace(1e-3, 50, 500_001)
        assert np.max(P.evaluate(PotentialSpec.softened(C), r)) == pytest.approx(1 / (math.e * C), rel=1e-8)


# -- derivatives ---------------------------------------------------------------


def test_gradient_zero_at_origin():
    s = PotentialSpec.softened(1.0)
    for j in range(3):
        assert P.grad_component(s, np.zeros(3), j) == 0.0


def test_gradient_fd_at_unit_point():
    s = PotentialSpec.softened(1.0)
    x = np.array([1.0, 0.0, 0.0])
    # d/dr vanishes at r = C, so compare absolutely there
    assert abs(P.grad_component(s, x, 0) - fd_gradient(s, x, 0)) < 1e-10
    x = np.array([0.6, 0.9, -0.3])
    for j in range(3):
        g = P.grad_component(s, x, j)
        assert g == pytest.approx(fd_gradient(s, x, j), rel=1e-6)


def test_gradient_sign_of_exponential_term():
    # the C-term enters with a plus sign: the potential rises for r < C and falls after
    s = PotentialSpec.softened(1.0)
    assert P.grad_component(s, np.array([0.5, 0, 0]), 0) > 0
    assert P.grad_component(s, np.array([2.0, 0, 0]), 0) < 0


def test_yukawa_radial_derivative_unbounded():
    y = PotentialSpec.yukawa(1.0, 1.0)
    vals = np.abs(P.radial_derivative(y, np.array([1e-1, 1e-2, 1e-3])))
    assert np.all(np.diff(vals) > 0) and vals[-1] > 1e5
    with pytest.raises(SingularEvaluationError):
        P.grad_component(y, np.zeros(3), 0)


def test_laplacian_unit_point_matches_fd():
    s = PotentialSpec.softened(1.0)
    fd = fd_laplacian_3d(s, 1.0)
    assert fd == pytest.approx(-E1, rel=1e-6)
    assert P.laplacian(s, 1.0) == pytest.approx(fd, rel=1e-6)


def test_laplacian_vanishes_at_origin_and_tail_square_integrable():
    s = PotentialSpec.softened(1.0)
    assert abs(P.laplacian(s, 1e-3)) < 1e-300
    r = np.geomspace(1.0, 1e6, 20001)
    integrand = 4 * np.pi * r**2 * P.laplacian(s, r) ** 2
    total = np.trapezoid(integrand, r)
    assert np.isfinite(total) and integrand[-1] * r[-1] < 1e-12


@given(C=Cs, r=st.floats(0.3, 10.0))
def test_laplacian_property(C, r):
    s = PotentialSpec.softened(C)
    lap = P.laplacian(s, r)
    if abs(r - C / 2) < 1e-3 * C:
        return  # zero crossing
    assert lap == pytest.approx(fd_laplacian_3d(s, r), rel=1e-5)


@given(C=Cs, r=radii, u=st.tuples(st.floats(0.3, 1), st.floats(0.3, 1), st.floats(0.3, 1)))
def test_gradient_property(C, r, u):
    u = np.array(u) / np.linalg.norm(u)
    s = PotentialSpec.softened(C)
    x = r * u
    radial = P.radial_derivative(s, r)
    # size of each of the two terms of dV/dr; their sum vanishes at r = C
    scale = P.evaluate(s, r) * (1 / r + C / r**2)
    for j in range(3):
        g = P.grad_component(s, x, j)
        assert g == pytest.approx(radial * u[j], rel=1e-12, abs=1e-14 * scale)
        assert g == pytest.approx(fd_gradient(s, x, j), rel=1e-6, abs=1e-8 * scale)


@given(C=Cs, samples=st.lists(st.floats(0.05, 50.0), min_size=1, max_size=20))
def test_eigenrelation_property(C, samples):
    assert P.radial_momentum_residual(PotentialSpec.softened(C), samples) < 1e-12


def test_eigenrelation_with_fd_derivative():
    for C in (0.5, 1.0):
        r = np.linspace(0.1, 10, 100)
        assert P.radial_momentum_residual(PotentialSpec.softened(C), r) < 1e-12
        assert P.radial_momentum_residual(PotentialSpec.softened(C), r, derivative="fd") < 1e-4


# -- structural properties -----------------------------------------------------


@given(C=Cs, r=st.floats(1e-4, 1e3))
def test_global_bound(C, r):
    v = P.evaluate(PotentialSpec.softened(C), r)
    assert 0 <= v <= min(1 / r, 1 / (math.e * C)) * (1 + 1e-12)


@given(r=st.floats(0.01, 100.0), C1=Cs, C2=Cs)
def test_monotone_in_C(r, C1, C2):
    lo, hi = sorted((C1, C2))
    assert P.evaluate(PotentialSpec.softened(lo), r) >= P.evaluate(PotentialSpec.softened(hi), r)
    assert P.evaluate(PotentialSpec.softened(lo), r) <= 1 / r


@given(C=st.floats(0.5, 5.0), frac=st.floats(1e-3, 1.0 / 100))
def test_flatness_deep_inside(C, frac):
    # well inside the origin every finite-difference derivative up to order 4 is negligible
    r = C * frac
    for k in (1, 2, 3, 4):
        assert abs(P.radial_fd_derivative(PotentialSpec.softened(C), r, k, r / 10)) < 1e-10


def test_fd_derivative_matches_analytic_first_order():
    s = PotentialSpec.softened(1.0)
    assert P.radial_fd_derivative(s, 0.5, 1, 1e-5) == pytest.approx(P.radial_derivative(s, 0.5), rel=1e-8)


# -- trajectories --------------------------------------------------------------


def test_trajectory_examples():
    s = PotentialSpec.softened(1.0)
    line = NucleusTrajectory([0.0, 2.0], [[0, 0, 0], [2, 0, 0]])
    assert P.eval_moving(s, [1, 0, 0], 1.0, line) == 0.0
    knots = NucleusTrajectory([0.0, 1.0], [[0, 0, 0], [2, 0, 0]])
    assert P.eval_moving(s, [0, 0, 0], 0.5, knots) == pytest.approx(E1, rel=1e-15)
    still = NucleusTrajectory.stationary()
    x = np.array([0.3, -1.2, 0.4])
    for t in (0.0, 3.0, 100.0):
        assert P.eval_moving(s, x, t, still) == pytest.approx(P.evaluate(s, np.linalg.norm(x)), rel=1e-14)


def test_out_of_span():
    traj = NucleusTrajectory([0.0, 1.0], [[0, 0, 0], [1, 0, 0]])
    with pytest.raises(OutOfSpanError):
        traj(1.5)


def test_trajectory_validation():
    with pytest.raises(ConfigError):
        NucleusTrajectory([0.0, 0.0], [[0, 0, 0], [1, 0, 0]])
    with pytest.raises(ConfigError):
        NucleusTrajectory([0.0, 1.0], [[0, 0, 0]])
    with pytest.raises(ConfigError):
        NucleusTrajectory.from_records([{"t": 0.0}])


def test_trajectory_roundtrip(tmp_path):
    traj = NucleusTrajectory.from_function(lambda t: (math.sin(t), 0.0, t), 0.0, 1.0, n_knots=11)
    path = tmp_path / "traj.json"
    traj.save(path)
    back = NucleusTrajectory.load(path)
    assert back.times == traj.times
    np.testing.assert_array_equal(back.positions, traj.positions)


@given(t=st.floats(0.0, 3.0), dt=st.floats(1e-9, 1e-3))
def test_moving_potential_continuous_in_time(t, dt):
    # piecewise-linear path with speed <= 2 and |grad V_P| <= some finite bound
    traj = NucleusTrajectory([0.0, 1.0, 2.0, 3.0], [[0, 0, 0], [2, 0, 0], [2, 1, 0], [0, 0, 0]])
    s = PotentialSpec.softened(1.0)
    x = np.array([0.5, 0.5, 0.0])
    t2 = min(t + dt, 3.0)
    r = np.linspace(1e-3, 50, 200001)
    lip = np.max(np.abs(P.radial_derivative(s, r)))
    assert abs(P.eval_moving(s, x, t2, traj) - P.eval_moving(s, x, t, traj)) <= lip * 2 * (t2 - t) * (1 + 1e-9) + 1e-15


def test_multicenter_examples():
    s1 = PotentialSpec.softened(1.0)
    origin = NucleusTrajectory.stationary()
    assert P.eval_multicenter([(s1, origin)], [[1, 0, 0]], 0.0) == pytest.approx(-E1)
    s2 = PotentialSpec.softened(1.0, Z=2.0)
    assert P.eval_multicenter([(s2, origin)], [[1, 0, 0], [-1, 0, 0]], 0.0) == pytest.approx(-4 * E1)
    a = (PotentialSpec.softened(1.0, Z=1.0), NucleusTrajectory.stationary((1, 0, 0)))
    b = (PotentialSpec.softened(1.0, Z=3.0), NucleusTrajectory.stationary((-1, 0, 0)))
    assert P.eval_multicenter([a, b], [[0, 0, 0]], 0.0) == pytest.approx(-4 * E1)


def test_sup_difference():
    a, b = PotentialSpec.softened(1.0), PotentialSpec.softened(2.0)
    d = P.sup_difference(a, b)
    assert 0 < d <= P.sup_norm(a)
