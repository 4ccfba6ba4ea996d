import math

import numpy as np
import pytest

from toricq import SymplecticPotential, legendre_inverse, potential_jet, regularity_scan
from toricq.errors import BoundaryPoint
from toricq.polynomial import Polynomial
from toricq.polytope import FIXTURES
from toricq.potential import f_mode, mode_functions


def interior_samples(model, k, seed):
    rng = np.random.default_rng(seed)
    V = np.array([[float(c) for c in v] for v in model.px_vertices])
    w = rng.dirichlet(np.ones(len(V)), size=k)
    return w @ V


def test_cp1_jet_at_center(cp1):
    jet = potential_jet(cp1, 0.0, [1.0])
    assert jet.g == pytest.approx(1.5 * math.log(1.5), rel=1e-15)
    assert jet.y[0] == pytest.approx(0.0, abs=1e-15)
    assert jet.G[0, 0] == pytest.approx(2 / 3, rel=1e-15)
    jet = potential_jet(cp1, 10.0, [1.0])
    assert jet.y[0] == pytest.approx(0.0, abs=1e-15)
    assert jet.G[0, 0] == pytest.approx(2 / 3 + 10, rel=1e-15)


def test_negative_s_rejected_by_jet(cp1):
    with pytest.raises(ValueError):
        potential_jet(cp1, -1.0, [1.0])


def test_boundary_rejected(cp1):
    with pytest.raises(BoundaryPoint):
        SymplecticPotential(cp1, 0.0).gradient([-0.5])


@pytest.mark.parametrize("name", ["cp1", "cp2", "blowup", "cp1xcp1"])
def test_finite_difference_derivatives(models, name):
    m = models[name]
    pot = SymplecticPotential(m, 1.5)
    X = interior_samples(m, 20, 1)
    eps = 1e-6
    grad = pot.gradient(X)
    hess = pot.hessian(X)
    for k in range(m.n):
        e = np.zeros(m.n)
        e[k] = eps
        fd = (pot.value(X + e) - pot.value(X - e)) / (2 * eps)
        assert np.allclose(fd, grad[:, k], rtol=1e-6, atol=1e-6)
        fd2 = (pot.gradient(X + e) - pot.gradient(X - e)) / (2 * eps)
        assert np.allclose(fd2, hess[:, :, k], rtol=1e-6, atol=1e-6)


@pytest.mark.parametrize("s", [0.0, 3.0, 100.0])
def test_legendre_center(cp1, s):
    assert legendre_inverse(cp1, s, [0.0])[0] == pytest.approx(1.0, abs=1e-12)


def test_legendre_drives_to_boundary(cp1):
    xs = [legendre_inverse(cp1, 0.0, [y])[0] for y in (1.0, 5.0, 10.0)]
    assert xs[0] < xs[1] < xs[2] < 2.5
    assert 2.5 - xs[2] < 1e-7


def test_mode_function_examples(cp1):
    psi = Polynomial.half_square_distance((0,))
    X = np.array([[0.0], [1.0], [2.0]])
    assert np.allclose(f_mode(psi, X, (1,)), 0.5 * X[:, 0] ** 2 - X[:, 0])
    assert f_mode(psi, [[1.0]], (1,))[0] == -0.5
    mf = mode_functions(cp1, 0.0, (1,))
    assert mf.h_m(np.array([[1.0]]))[0] == pytest.approx(-1.5 * math.log(1.5), rel=1e-15)
    # second derivative of f_m at m equals that of psi
    e = 1e-4
    f = mf.f_m(np.array([[1 - e], [1.0], [1 + e]]))
    assert (f[0] - 2 * f[1] + f[2]) / e**2 == pytest.approx(1.0, rel=1e-6)


def test_regularity_cp1_is_constant(cp1):
    rep = regularity_scan(cp1)
    assert rep.passed
    assert rep.min_value == pytest.approx(1.5, rel=1e-12)
    assert rep.max_value == pytest.approx(1.5, rel=1e-12)


@pytest.mark.parametrize("name", FIXTURES)
def test_regularity_corpus(models, name):
    rep = regularity_scan(models[name])
    assert rep.passed and rep.ratio < 10
