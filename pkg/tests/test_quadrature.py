import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from toricq import QuadratureNotConverged, integrate
from toricq.quadrature import simplex_rule

GAUSS = math.sqrt(math.pi / 50)
SQRT = (2 / 3) * 3**1.5


def const(X):
    return np.zeros(len(X))


def gauss(X):
    return -50.0 * (X[:, 0] - 1.0) ** 2


def sqrt_ell(X):
    return 0.5 * np.log(X[:, 0] + 0.5)


ORACLES = [(const, 3.0), (gauss, GAUSS), (sqrt_ell, SQRT)]


@pytest.mark.parametrize("log_density,exact", ORACLES)
def test_analytic_oracles(cp1, log_density, exact):
    r = integrate(log_density, cp1, 1e-8)
    assert abs(r.value - exact) <= 1e-8 * exact
    assert r.abs_error_estimate <= 1e-8 * r.value


@pytest.mark.parametrize("log_density,exact", ORACLES)
def test_tighter_tolerance_never_hurts(cp1, log_density, exact):
    tols = [1e-3, 1e-4, 1e-5, 1e-6, 1e-7, 1e-8, 1e-9, 1e-10]
    errs = [abs(integrate(log_density, cp1, t).value - exact) for t in tols]
    assert all(b <= a for a, b in zip(errs, errs[1:]))


@pytest.mark.parametrize("n", [1, 2, 3])
def test_simplex_rule_exact_on_monomials(n):
    X, W = simplex_rule(n, 7)
    assert W.sum() == pytest.approx(1 / math.factorial(n), rel=1e-14)
    # int_simplex x^a = a! / (n + a)! for a single coordinate
    for a in range(7):
        assert W @ X[:, 0] ** a == pytest.approx(math.factorial(a) / math.factorial(n + a), rel=1e-12)


def test_unit_triangle_polynomial():
    cell = np.array([[[0.0, 0.0], [1.0, 0.0], [0.0, 1.0]]])
    r = integrate(lambda X: np.log(X[:, 0] ** 2 * X[:, 1] + 1e-300), cell, 1e-10)
    # int x^2 y over the unit triangle = 2! 1! / 5!
    assert r.value == pytest.approx(2 / 120, rel=1e-12)


def test_factor_and_log_shift(cp1):
    r = integrate(const, cp1, 1e-8, factor=lambda X: X[:, 0])
    assert r.value == pytest.approx(3.0, rel=1e-14)  # int x dx over [-1/2, 5/2]
    big = integrate(lambda X: 800.0 + gauss(X), cp1, 1e-8)
    assert big.value == math.inf or big.value > 1e300
    assert big.log_value == pytest.approx(800.0 + math.log(GAUSS), rel=1e-14)


@settings(max_examples=25, deadline=None)
@given(st.floats(min_value=1e-3, max_value=1e3))
def test_linearity_in_constant(a):
    from toricq import load_fixture

    cp1 = load_fixture("cp1")
    base = integrate(gauss, cp1, 1e-9)
    scaled = integrate(lambda X: gauss(X) + math.log(a), cp1, 1e-9)
    assert scaled.value == pytest.approx(a * base.value, rel=1e-12)


def test_repeat_runs_bit_identical(blowup):
    def log_density(X):
        return -3.0 * np.sum((X - [0.0, 1.0]) ** 2, axis=1) + 0.25 * np.log(X[:, 0] + 1.5)

    a = integrate(log_density, blowup, 1e-10)
    b = integrate(log_density, blowup, 1e-10)
    assert (a.value, a.abs_error_estimate, a.cells_used) == (b.value, b.abs_error_estimate, b.cells_used)


def test_thread_count_does_not_change_bits():
    # 6000 seven-node intervals span several 16384-point chunks per sweep
    edges = np.linspace(-0.5, 2.5, 6001)
    cells = np.stack([edges[:-1], edges[1:]], axis=1)[:, :, None]
    one = integrate(sqrt_ell, cells, 1e-12, threads=1)
    four = integrate(sqrt_ell, cells, 1e-12, threads=4)
    assert one.value == four.value and one.abs_error_estimate == four.abs_error_estimate
    assert one.value == pytest.approx(SQRT, rel=1e-11)


def test_budget_exhaustion(cp1):
    with pytest.raises(QuadratureNotConverged):
        integrate(sqrt_ell, cp1, 1e-12, max_cells=8)


@pytest.mark.parametrize("tol", [0.0, 1e-15, 0.05])
def test_tolerance_range(cp1, tol):
    with pytest.raises(ValueError):
        integrate(const, cp1, tol)


def test_hint_does_not_change_answer(cp1):
    plain = integrate(lambda X: -2000.0 * (X[:, 0] - 1.0) ** 2, cp1, 1e-9)
    hinted = integrate(lambda X: -2000.0 * (X[:, 0] - 1.0) ** 2, cp1, 1e-9, hint=((1.0,), 1 / math.sqrt(1000)))
    assert hinted.value == pytest.approx(math.sqrt(math.pi / 2000), rel=1e-9)
    assert plain.value == pytest.approx(hinted.value, rel=1e-8)
