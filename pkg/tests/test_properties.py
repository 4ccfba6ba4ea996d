"""Property-based checks of structural identities."""

import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from toricq import NonDelzant, SymplecticPotential, build_model, legendre_inverse, load_fixture
from toricq.fan import divisor_of_monomial
from toricq.potential import f_mode

CP1 = load_fixture("cp1")
BLOWUP = load_fixture("blowup")
CP2 = load_fixture("cp2")

unimodular = st.lists(
    st.tuples(st.integers(0, 1), st.integers(-2, 2)), min_size=0, max_size=6
).map(lambda ops: _compose(ops))


def _compose(ops):
    U = np.eye(2, dtype=int)
    for which, k in ops:
        E = np.eye(2, dtype=int)
        E[which, 1 - which] = k
        U = E @ U
    return U


def _transform(model, U, perm):
    facets = [(tuple(int(c) for c in U @ np.array(f.normal)), f.lambda_L) for f in model.facets]
    return [facets[i] for i in perm]


def _points(model, k, seed):
    V = np.array([[float(c) for c in v] for v in model.px_vertices])
    w = np.random.default_rng(seed).dirichlet(np.ones(len(V)), size=k)
    return w @ V


@settings(max_examples=30, deadline=None)
@given(unimodular, st.permutations(range(4)), st.permutations(range(3)))
def test_delzant_invariant_under_relabel_and_basis_change(U, perm, perm3):
    m = build_model(_transform(BLOWUP, U, perm))
    assert m.quantum_dimension == BLOWUP.quantum_dimension
    assert m.volume() == BLOWUP.volume()
    bad = [((1, 0), 0), ((0, 1), 0), ((-1, -2), 2)]
    bad = [(tuple(int(c) for c in U @ np.array(nu)), lam) for nu, lam in bad]
    with pytest.raises(NonDelzant):
        build_model([bad[i] for i in perm3])


ints2 = st.tuples(st.integers(-50, 50), st.integers(-50, 50))


@given(ints2, ints2)
def test_divisor_linear(a, b):
    s = tuple(x + y for x, y in zip(a, b))
    lhs = divisor_of_monomial(BLOWUP, s)
    rhs = tuple(x + y for x, y in zip(divisor_of_monomial(BLOWUP, a), divisor_of_monomial(BLOWUP, b)))
    assert lhs == rhs


@settings(max_examples=100, deadline=None)
@given(st.floats(0, 100), st.integers(0, 2**31 - 1), st.sampled_from(["cp1", "blowup", "cp2"]))
def test_legendre_round_trip(s, seed, name):
    model = {"cp1": CP1, "blowup": BLOWUP, "cp2": CP2}[name]
    x0 = _points(model, 1, seed)
    pot = SymplecticPotential(model, s)
    y = pot.gradient(x0)[0]
    x = legendre_inverse(model, s, y, potential=pot)
    assert np.max(np.abs(x - x0[0])) <= 1e-8


@settings(max_examples=50, deadline=None)
@given(st.floats(0, 1e4), st.integers(0, 2**31 - 1))
def test_hessian_affine_in_s(s, seed):
    X = _points(BLOWUP, 8, seed)
    Gs = SymplecticPotential(BLOWUP, s).hessian(X)
    G0 = SymplecticPotential(BLOWUP, 0.0).hessian(X)
    assert np.allclose(Gs, G0 + s * BLOWUP.psi.hessian(X), rtol=1e-14, atol=1e-12)


def test_log_det_limit():
    X = _points(BLOWUP, 20, 11)
    target = np.log(np.linalg.det(BLOWUP.psi.hessian(X)))
    gaps = []
    for s in (1e2, 1e4, 1e6):
        ld = SymplecticPotential(BLOWUP, s).log_det_hessian(X) - 2 * math.log(s)
        gaps.append(np.max(np.abs(ld - target)))
    assert gaps[0] > gaps[1] > gaps[2] and gaps[2] < 1e-4


@pytest.mark.parametrize("model,m", [(CP1, (0,)), (CP1, (1,)), (BLOWUP, (0, 1)), (BLOWUP, (-1, 2))])
def test_f_mode_minimum(model, m):
    X = _points(model, 2000, 5)
    f = f_mode(model.psi, X, m)
    floor = -float(model.psi.exact(m))
    assert np.all(f >= floor - 1e-12)
    mf = f_mode(model.psi, np.asarray(m, dtype=float).reshape(1, -1), m)[0]
    assert mf == pytest.approx(floor, abs=1e-14)
    # strictly above the floor away from m
    far = np.linalg.norm(X - np.asarray(m, dtype=float), axis=1) > 1e-2
    assert np.all(f[far] > floor)


@pytest.mark.parametrize("model,m", [(CP1, (2,)), (BLOWUP, (1, 1)), (CP2, (0, 0))])
@pytest.mark.parametrize("s", [0.0, 2.0, 50.0])
def test_bregman_positivity(model, m, s):
    pot = SymplecticPotential(model, s)
    X = _points(model, 2000, 9)
    mx = np.asarray(m, dtype=float).reshape(1, -1)
    gm = pot.value(mx)[0]
    assert np.all(pot.mode_h(X, m) + gm >= -1e-12)
    assert pot.mode_h(mx, m)[0] + gm == pytest.approx(0.0, abs=1e-13)
