"""Symplectic potentials ``g_s = g_P + phi + s * psi`` on the moment polytope.

``g_P = 1/2 sum_j l_j log l_j`` is the canonical Guillemin potential. All
derivatives are closed form::

    grad g_P = 1/2 sum_j nu_j (log l_j + 1)
    Hess g_P = 1/2 sum_j nu_j nu_j^T / l_j

Every evaluator takes a batch of points of shape ``(N, n)``.
"""

from __future__ import annotations

import itertools
import math
from dataclasses import dataclass
from typing import Callable

import numpy as np

from .errors import BoundaryPoint, NewtonDiverged, NonConvexPotential, RegularityFailure
from .polynomial import Polynomial
from .polytope import ToricModel


@dataclass(frozen=True)
class PotentialJet:
    s: float
    x: np.ndarray
    g: float
    y: np.ndarray
    G: np.ndarray
    log_det_G: float


def _as_points(X, n):
    X = np.asarray(X, dtype=float)
    if X.ndim == 1:
        X = X.reshape(-1, n) if n > 1 or X.size != 1 else X.reshape(1, 1)
    return X


def cholesky_logdet(G: np.ndarray) -> np.ndarray:
    """``log det`` of a stack of SPD matrices through Cholesky factors."""
    try:
        L = np.linalg.cholesky(G)
    except np.linalg.LinAlgError as exc:
        raise NonConvexPotential("Hessian of the potential is not positive definite") from exc
    return 2.0 * np.sum(np.log(np.diagonal(L, axis1=-2, axis2=-1)), axis=-1)


class SymplecticPotential:
    """The potential ``g_P + phi + s * psi`` of a model.

    ``phi`` and ``psi`` default to the model's own terms; passing other
    polynomials selects a different admissible potential (used for BKS
    pairings between unrelated complex structures). Negative ``s`` is
    accepted as long as the Hessian stays positive definite, which finite
    differences around ``s = 0`` rely on.
    """

    def __init__(self, model: ToricModel, s: float = 0.0, phi: Polynomial | None = None,
                 psi: Polynomial | None = None):
        self.model = model
        self.s = float(s)
        self.phi = model.phi if phi is None else phi
        self.psi = model.psi if psi is None else psi
        self._N = model.normals
        self._lam = model.lambdas

    def __repr__(self):
        return f"SymplecticPotential(model={self.model.name!r}, s={self.s})"

    def key(self):
        return (self.s, self.phi, self.psi)

    # smooth part q = phi + s psi
    def _q(self, X):
        return self.phi(X) + self.s * self.psi(X)

    def _dq(self, X):
        return self.phi.gradient(X) + self.s * self.psi.gradient(X)

    def _d2q(self, X):
        return self.phi.hessian(X) + self.s * self.psi.hessian(X)

    def ell(self, X, *, allow_boundary: bool = False) -> np.ndarray:
        X = _as_points(X, self.model.n)
        L = X @ self._N.T + self._lam
        if allow_boundary:
            if np.any(L < 0):
                raise BoundaryPoint("point outside P_X")
        elif np.any(L <= 0):
            raise BoundaryPoint("point not strictly inside P_X")
        return L

    def value(self, X, *, extend: bool = False) -> np.ndarray:
        """``g_s(x)``; with ``extend`` the boundary value uses ``0 log 0 = 0``."""
        X = _as_points(X, self.model.n)
        L = self.ell(X, allow_boundary=extend)
        with np.errstate(divide="ignore", invalid="ignore"):
            llogl = np.where(L > 0, L * np.log(np.where(L > 0, L, 1.0)), 0.0)
        return 0.5 * llogl.sum(axis=1) + self._q(X)

    def gradient(self, X) -> np.ndarray:
        X = _as_points(X, self.model.n)
        L = self.ell(X)
        return 0.5 * (np.log(L) + 1.0) @ self._N + self._dq(X)

    def hessian(self, X) -> np.ndarray:
        X = _as_points(X, self.model.n)
        L = self.ell(X)
        return 0.5 * np.einsum("ij,ik,pi->pjk", self._N, self._N, 1.0 / L) + self._d2q(X)

    def log_det_hessian(self, X) -> np.ndarray:
        return cholesky_logdet(self.hessian(X))

    def jets(self, X):
        """``(ell, g, grad g, Hess g)`` for a batch, sharing the facet values."""
        X = _as_points(X, self.model.n)
        L = self.ell(X)
        logL = np.log(L)
        g = 0.5 * np.sum(L * logL, axis=1) + self._q(X)
        y = 0.5 * (logL + 1.0) @ self._N + self._dq(X)
        G = 0.5 * np.einsum("ij,ik,pi->pjk", self._N, self._N, 1.0 / L) + self._d2q(X)
        return L, g, y, G

    def jet(self, x) -> PotentialJet:
        x = np.asarray(x, dtype=float).reshape(1, self.model.n)
        _, g, y, G = self.jets(x)
        return PotentialJet(self.s, x[0], float(g[0]), y[0], G[0], float(cholesky_logdet(G)[0]))

    def mode_h(self, X, m, *, ell=None) -> np.ndarray:
        """``h_m(x) = (x - m) . grad g_s(x) - g_s(x)``.

        Evaluated in the algebraically simplified form in which the
        ``l log l`` terms cancel, which is better conditioned near facets::

            1/2 sum_j (l_j(x) - l_j(m) - l_j(m) log l_j(x)) + (x - m) . grad q - q
        """
        X = _as_points(X, self.model.n)
        L = self.ell(X) if ell is None else ell
        m = np.asarray(m, dtype=float).reshape(-1)
        Lm = self._N @ m + self._lam
        guillemin = 0.5 * np.sum(L - Lm - Lm * np.log(L), axis=1)
        D = X - m
        return guillemin + np.einsum("pi,pi->p", D, self._dq(X)) - self._q(X)


def potential_jet(model: ToricModel, s: float, x) -> PotentialJet:
    if s < 0:
        raise ValueError("s must be nonnegative")
    return SymplecticPotential(model, s).jet(x)


# -- Legendre inversion -----------------------------------------------------------


def legendre_inverse(model: ToricModel, s: float, y, *, potential: SymplecticPotential | None = None,
                     tol: float = 1e-10, max_iter: int = 100) -> np.ndarray:
    """The unique interior ``x`` with ``grad g_s(x) = y``.

    Damped Newton on the strictly convex ``g_s(x) - y.x`` started at the
    barycenter, with Armijo backtracking (factor 1/2) that never leaves the
    polytope interior. Once a full Newton step falls below the floating-point
    resolution of ``x`` the iterate is returned even if the residual target
    cannot be represented (points within ~1e-9 of a facet).
    """
    pot = potential if potential is not None else SymplecticPotential(model, s)
    n = model.n
    y = np.asarray(y, dtype=float).reshape(n)
    x = np.array([float(c) for c in model.barycenter])
    target = tol * (1.0 + np.linalg.norm(y))

    def F(z):
        return float(pot.value(z)[0] - y @ z)

    def residual(z):
        return pot.gradient(z)[0] - y

    def interior(z):
        return np.all(z @ pot._N.T + pot._lam > 0)

    r = residual(x)
    for _ in range(max_iter):
        rn = np.linalg.norm(r)
        if rn <= target:
            return x
        G = pot.hessian(x)[0]
        step = -np.linalg.solve(G, r)
        if np.linalg.norm(step) <= 8 * np.finfo(float).eps * max(1.0, np.linalg.norm(x)):
            return x
        f0 = F(x)
        slope = float(r @ step)
        t = 1.0
        while True:
            cand = x + t * step
            if interior(cand):
                rc = residual(cand)
                if F(cand) <= f0 + 1e-4 * t * slope or np.linalg.norm(rc) < rn:
                    break
            t *= 0.5
            if t < 1e-20:
                raise NewtonDiverged(f"line search failed at x={x.tolist()} for y={y.tolist()}")
        x, r = cand, rc
    if np.linalg.norm(r) <= target:
        return x
    raise NewtonDiverged(f"no convergence in {max_iter} iterations for y={y.tolist()}")


# -- mode functions ---------------------------------------------------------------


@dataclass(frozen=True)
class ModeFunctions:
    m: tuple[int, ...]
    h_m: Callable[[np.ndarray], np.ndarray]
    f_m: Callable[[np.ndarray], np.ndarray]


def f_mode(psi: Polynomial, X, m) -> np.ndarray:
    """``f_m(x) = (x - m) . grad psi(x) - psi(x)``; minimal (= -psi(m)) at x = m."""
    X = _as_points(X, psi.n)
    D = X - np.asarray(m, dtype=float).reshape(-1)
    return np.einsum("pi,pi->p", D, psi.gradient(X)) - psi(X)


def mode_functions(model: ToricModel, s: float, m) -> ModeFunctions:
    pot = SymplecticPotential(model, s)
    m = tuple(m)
    return ModeFunctions(m, lambda X: pot.mode_h(X, m), lambda X: f_mode(model.psi, X, m))


# -- regularity -------------------------------------------------------------------


@dataclass(frozen=True)
class RegularityReport:
    min_value: float
    max_value: float
    samples: int
    passed: bool

    @property
    def ratio(self) -> float:
        return self.max_value / self.min_value if self.min_value > 0 else math.inf


def boundary_approach_points(model: ToricModel, distances=None) -> np.ndarray:
    """Points at ``l = d`` from each facet (toward the facet centroid) and from each vertex."""
    if distances is None:
        distances = 10.0 ** -np.arange(1, 7)
    b = np.array([float(c) for c in model.barycenter])
    L_b = model.ell(b)[0]
    pts = []
    for j in range(model.r):
        c = np.array([[float(a) for a in v] for v in model.facet_vertices(j)]).mean(axis=0)
        # l_j is affine and zero at c, so l_j(c + t (b - c)) = t l_j(b)
        for d in distances:
            pts.append(c + (d / L_b[j]) * (b - c))
    for v in model.px_vertices:
        active = list(model.vertex_chart(v).facet_indices)
        v = np.array([float(a) for a in v])
        lmin = np.min(L_b[active])
        for d in distances:
            pts.append(v + (d / lmin) * (b - v))
    return np.array(pts)


def regularity_scan(model: ToricModel, grid_density: int = 9, *, raise_on_failure: bool = True,
                    max_ratio: float = 1e4) -> RegularityReport:
    """Scan ``det Hess(g_P + phi) * prod_j l_j`` over a grid and toward the boundary."""
    pot = SymplecticPotential(model, 0.0, psi=Polynomial.zero(model.n))
    lo, hi = model.bounding_box()
    axes = [np.linspace(float(a), float(b), grid_density) for a, b in zip(lo, hi)]
    grid = np.array(list(itertools.product(*axes))).reshape(-1, model.n)
    grid = grid[np.all(model.ell(grid) > 0, axis=1)]
    X = np.vstack([grid, boundary_approach_points(model)])
    L = pot.ell(X)
    try:
        logprod = pot.log_det_hessian(X) + np.log(L).sum(axis=1)
    except NonConvexPotential:
        if raise_on_failure:
            raise
        return RegularityReport(math.nan, math.nan, len(X), False)
    vals = np.exp(logprod)
    lo_v, hi_v = float(vals.min()), float(vals.max())
    ok = bool(np.all(np.isfinite(vals)) and lo_v > 0 and hi_v / lo_v < max_ratio)
    report = RegularityReport(lo_v, hi_v, len(X), ok)
    if not ok and raise_on_failure:
        raise RegularityFailure(f"regularity product ranges over [{lo_v:g}, {hi_v:g}]", report)
    return report
