"""Acceptance criteria of the build, one test (and one printed line) each.

Run standalone with ``python3 tests/test_acceptance.py`` or as part of the
suite; the lines are repeated in the pytest terminal summary.
"""

import itertools
import math
import sys
import time

import numpy as np
import pytest

from toricq import (
    additivity_defect,
    delta_pairing,
    delta_target,
    even_divisor_criterion,
    horizontality_defect,
    integrate,
    laplace_ratio,
    parity_criterion,
    pointwise_density,
    real_basis,
    sqrtk_exists,
    unitarity_derivative,
)
from toricq.cli import main as cli_main
from toricq.polynomial import Polynomial
from toricq.polytope import FIXTURES, fixture_path

pytestmark = pytest.mark.acceptance


def scan_box(model, radius=4):
    # brute force: every integer point satisfying all corrected inequalities
    pts = []
    for p in itertools.product(range(-radius, radius + 1), repeat=model.n):
        if all(sum(a * b for a, b in zip(f.normal, p)) + f.lambda_L >= 0 for f in model.facets):
            pts.append(p)
    return sorted(pts)


def test_criterion_01_dimension_counts(models, verdict):
    t = time.perf_counter()
    cp1, blowup = models["cp1"], models["blowup"]
    ok_cp1 = cp1.quantum_dimension == 3 and cp1.lattice_points() == [(0,), (1,), (2,)]
    scanned = scan_box(blowup)
    ok_blowup = blowup.quantum_dimension == 5 and blowup.lattice_points() == scanned
    detail = f"CP1 basis {cp1.lattice_points()}, blow-up basis {blowup.lattice_points()} (scan {scanned})"
    assert verdict(1, "dimension counts", ok_cp1 and ok_blowup, detail, time.perf_counter() - t, 1)


def test_criterion_02_sqrtk(models, verdict):
    t = time.perf_counter()
    expected = {"cp2": False, "cp1": True, "blowup": False, "cp1xcp1": True}
    got = {name: sqrtk_exists(models[name]) for name in expected}
    agree = all(parity_criterion(models[n]) == even_divisor_criterion(models[n]) for n in FIXTURES)
    detail = f"verdicts {got}, criteria agree on all {len(FIXTURES)} fixtures: {agree}"
    assert verdict(2, "sqrt(K) existence", got == expected and agree, detail, time.perf_counter() - t, 1)


def test_criterion_03_kahler_equals_real(models, verdict):
    t = time.perf_counter()
    same = {n: real_basis(models[n]) == models[n].lattice_points() for n in FIXTURES}
    assert verdict(3, "Kähler basis = real basis", all(same.values()), f"{same}", time.perf_counter() - t, 1)


def test_criterion_04_laplace_asymptotics(models, verdict):
    t = time.perf_counter()
    schedule = (10.0, 40.0, 160.0, 640.0)
    ok = True
    parts = []
    for name, m in (("cp1", (1,)), ("blowup", (0, 1))):
        R = [laplace_ratio(models[name], s, m, 1e-8)[0] for s in schedule]
        dev = [abs(r - 1) for r in R]
        rates = [b / a for a, b in zip(dev, dev[1:])]
        ok &= dev[-1] <= 0.01 and all(q <= 0.35 for q in rates)
        parts.append(f"{name} |R-1|={['%.2e' % d for d in dev]} rates={['%.3f' % q for q in rates]}")
    assert verdict(4, "Laplace asymptotics", ok, "; ".join(parts), time.perf_counter() - t, 60)


def test_criterion_05_delta_limit(models, verdict):
    t = time.perf_counter()
    cp1 = models["cp1"]
    profiles = {"1": None, "x": Polynomial.from_mapping(1, {(1,): 1}), "x^2": Polynomial.from_mapping(1, {(2,): 1})}
    ok = True
    parts = []
    for label, prof in profiles.items():
        target = delta_target(cp1, (1,), prof)
        val = delta_pairing(cp1, 640.0, (1,), prof)
        rel = abs(val - target) / abs(target)
        ok &= rel <= 0.02
        parts.append(f"t={label}: {val:.6f} vs {target:.6f}")
    val2 = delta_pairing(models["blowup"], 640.0, (0, 1))
    target2 = 2 * math.sqrt(math.pi)
    ok &= abs(val2 - target2) <= 0.02 * target2
    parts.append(f"blow-up t=1: {val2:.6f} vs {target2:.6f}")
    assert verdict(5, "delta limit", ok, "; ".join(parts), time.perf_counter() - t, 120)


def test_criterion_06_bks_additivity(models, verdict):
    t = time.perf_counter()
    rel_tol = 1e-8
    cases = [("cp1", (1,), 1.0, 3.0, 1.0), ("cp1", (1,), 0.5, 2.5, 0.5),
             ("blowup", (0, 1), 1.0, 3.0, 1.0), ("blowup", (0, 1), 0.5, 2.5, 0.5)]
    defects = [additivity_defect(models[n], m, a, b, d, rel_tol) for n, m, a, b, d in cases]
    ok = all(d <= 4 * rel_tol for d in defects)
    detail = ", ".join(f"{c[0]}{c[2:]}: {d:.1e}" for c, d in zip(cases, defects))
    assert verdict(6, "BKS additivity", ok, detail, time.perf_counter() - t, 60)


def test_criterion_07_non_unitarity(models, verdict):
    t = time.perf_counter()
    cp1 = models["cp1"]
    rep = unitarity_derivative(cp1, 50.0, (1,), check=False)
    sign_ok = rep.derivative < 0 and abs(rep.derivative) > 1e3 * rep.abs_error_estimate
    checks = [unitarity_derivative(cp1, s, (1,), check=False) for s in (0.0, 5.0)]
    cross_ok = all(abs(r.derivative - r.fd_check) <= 1e-6 * (1 + abs(r.derivative)) for r in checks)
    detail = (f"d/ds |sigma|^2 at s=50 is {rep.derivative:.4e} (bound {rep.abs_error_estimate:.1e}, "
              f"finite difference {rep.fd_check:.4e}); required < 0: {sign_ok}; "
              f"cross-check at s=0,5: {[(f'{r.derivative:.9f}', f'{r.fd_check:.9f}') for r in checks]} ok={cross_ok}")
    assert verdict(7, "non-unitarity", sign_ok and cross_ok, detail, time.perf_counter() - t, 60)


def test_criterion_08_flatness(models, verdict):
    t = time.perf_counter()
    worst = 0.0
    parts = []
    for name in ("cp1", "blowup"):
        model = models[name]
        for s0 in (0.0, 1.0):
            d = max(horizontality_defect(model, s0, m, 1e-3, 1e-10) for m in model.lattice_points())
            worst = max(worst, d)
            parts.append(f"{name} s0={s0:g}: {d:.1e}")
    assert verdict(8, "flatness", worst <= 1e-6, "; ".join(parts), time.perf_counter() - t, 120)


def test_criterion_09_quadrature(models, verdict, tmp_path, capsys):
    t = time.perf_counter()
    cp1 = models["cp1"]
    oracles = [
        (lambda X: np.zeros(len(X)), 3.0),
        (lambda X: -50.0 * (X[:, 0] - 1.0) ** 2, math.sqrt(math.pi / 50)),
        (lambda X: 0.5 * np.log(X[:, 0] + 0.5), (2 / 3) * 3**1.5),
    ]
    errs = [abs(integrate(f, cp1, 1e-8).value - exact) / exact for f, exact in oracles]
    outs = []
    for threads in (1, 4):
        path = tmp_path / f"norms{threads}.csv"
        code = cli_main(["norms", str(fixture_path("blowup")), "--s", "10,160", "--tol", "1e-10",
                         "--threads", str(threads), "--out", str(path)])
        outs.append((code, path.read_bytes()))
    capsys.readouterr()
    same = outs[0][0] == outs[1][0] == 0 and outs[0][1] == outs[1][1]
    ok = all(e <= 1e-8 for e in errs) and same
    detail = f"oracle rel errors {['%.1e' % e for e in errs]}, CSV byte-identical across threads: {same}"
    assert verdict(9, "quadrature oracles and determinism", ok, detail, time.perf_counter() - t, 10)


def _approach(model, j, distances):
    b = np.array([float(c) for c in model.barycenter])
    c = np.array([[float(a) for a in v] for v in model.facet_vertices(j)]).mean(axis=0)
    lb = float(model.ell(b)[0, j])
    return [c + (d / lb) * (b - c) for d in distances]


def test_criterion_10_boundary_behavior(models, verdict):
    t = time.perf_counter()
    distances = [10.0**-k for k in range(1, 9)]
    ok = True
    vanish = finite = 0
    worst_vanish = 0.0
    worst_osc = 0.0
    for name in ("cp1", "cp2", "blowup", "cp1xcp1"):
        model = models[name]
        for m in model.lattice_points():
            ellL = [v[1] for v in model.ell_values(list(m))]
            for j in range(model.r):
                vals = [pointwise_density(model, 1.0, m, x) for x in _approach(model, j, distances)]
                if ellL[j] > 0:
                    vanish += 1
                    worst_vanish = max(worst_vanish, vals[-1])
                    ok &= vals[-1] <= 1e-6
                else:
                    finite += 1
                    osc = abs(vals[-1] - vals[-2]) / abs(vals[-1])
                    worst_osc = max(worst_osc, osc)
                    ok &= vals[-1] > 0 and osc <= 1e-3
    detail = (f"{vanish} vanishing approaches (max value at 1e-8: {worst_vanish:.1e}), "
              f"{finite} finite approaches (max oscillation {worst_osc:.1e})")
    assert verdict(10, "boundary behavior", ok, detail, time.perf_counter() - t, 10)


if __name__ == "__main__":
    sys.exit(pytest.main([__file__, "-q", "-s"]))
