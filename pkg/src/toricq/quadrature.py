"""Deterministic adaptive quadrature over simplicial decompositions of P_X.

Base rule: tensor Gauss-Legendre (order 7 by default) pulled back to each
simplex through the Duffy collapse, so every node is strictly interior.
A cell's error estimate is the difference between its own rule and the sum
over its two longest-edge children; cells whose estimate exceeds their
volume share of the global tolerance are replaced by their children.

Densities are supplied in log form. The final sum uses ``math.fsum`` over
the cell contributions in creation order; fsum is correctly rounded, so the
result does not depend on how point evaluations were scheduled.
"""

from __future__ import annotations

import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from functools import lru_cache
from typing import Callable, Sequence

import numpy as np

from .errors import QuadratureNotConverged

DEFAULT_MAX_CELLS = 2**20
CHUNK = 16384


@dataclass(frozen=True)
class IntegralResult:
    value: float
    abs_error_estimate: float
    cells_used: int
    log_value: float = math.nan
    log_scale: float = 0.0
    scaled_value: float = math.nan

    @property
    def rel_error_estimate(self) -> float:
        return self.abs_error_estimate / abs(self.value) if self.value else math.inf


@lru_cache(maxsize=None)
def simplex_rule(n: int, order: int = 7):
    """Duffy-collapsed tensor Gauss rule on the unit simplex; weights sum to 1/n!."""
    t, w = np.polynomial.legendre.leggauss(order)
    t = 0.5 * (t + 1.0)
    w = 0.5 * w
    grids = np.meshgrid(*([t] * n), indexing="ij")
    wgrids = np.meshgrid(*([w] * n), indexing="ij")
    U = np.stack([g.ravel() for g in grids], axis=1)
    W = np.prod(np.stack([g.ravel() for g in wgrids], axis=1), axis=1)
    X = np.empty_like(U)
    rest = np.ones(len(U))
    for k in range(n):
        X[:, k] = rest * U[:, k]
        rest = rest * (1.0 - U[:, k])
    jac = np.ones(len(U))
    for k in range(n - 1):
        jac *= (1.0 - U[:, k]) ** (n - 1 - k)
    return X, W * jac


def _volumes(cells: np.ndarray) -> np.ndarray:
    E = cells[:, 1:, :] - cells[:, :1, :]
    n = E.shape[-1]
    return np.abs(np.linalg.det(E)) / math.factorial(n) if n > 1 else np.abs(E[:, 0, 0])


def _bisect(cells: np.ndarray):
    """Split every simplex at the midpoint of its longest edge (first one on ties)."""
    k = cells.shape[1]
    pairs = [(i, j) for i in range(k) for j in range(i + 1, k)]
    lengths = np.stack([np.sum((cells[:, i] - cells[:, j]) ** 2, axis=1) for i, j in pairs], axis=1)
    which = np.argmax(lengths, axis=1)
    I = np.array([pairs[w][0] for w in which])
    J = np.array([pairs[w][1] for w in which])
    rows = np.arange(len(cells))
    mid = 0.5 * (cells[rows, I] + cells[rows, J])
    a = cells.copy()
    b = cells.copy()
    a[rows, J] = mid
    b[rows, I] = mid
    return a, b


def _longest_edge(cells: np.ndarray) -> np.ndarray:
    k = cells.shape[1]
    return np.sqrt(np.max(np.stack(
        [np.sum((cells[:, i] - cells[:, j]) ** 2, axis=1) for i in range(k) for j in range(i + 1, k)],
        axis=1), axis=1))


class _Evaluator:
    def __init__(self, log_density, factor, order, n, threads):
        self.log_density = log_density
        self.factor = factor
        self.nodes, self.weights = simplex_rule(n, order)
        self.threads = max(1, int(threads))
        self.shift = None
        self.evaluations = 0

    def points(self, cells):
        E = cells[:, 1:, :] - cells[:, :1, :]
        return cells[:, :1, :] + np.einsum("qk,ckd->cqd", self.nodes, E)

    def _chunk(self, P):
        out = np.exp(np.asarray(self.log_density(P), dtype=float) - self.shift)
        if self.factor is not None:
            out = out * np.asarray(self.factor(P), dtype=float)
        return out

    def _map(self, fn, P):
        chunks = [P[i:i + CHUNK] for i in range(0, len(P), CHUNK)]
        if self.threads > 1 and len(chunks) > 1:
            with ThreadPoolExecutor(self.threads) as pool:
                parts = list(pool.map(fn, chunks))
        else:
            parts = [fn(c) for c in chunks]
        return np.concatenate(parts) if parts else np.empty(0)

    def init_shift(self, cells, log_shift):
        if log_shift is not None:
            self.shift = float(log_shift)
            return
        P = self.points(cells).reshape(-1, cells.shape[-1])
        logs = self._map(lambda c: np.asarray(self.log_density(c), dtype=float), P)
        finite = logs[np.isfinite(logs)]
        self.shift = float(finite.max()) if finite.size else 0.0

    def integrals(self, cells):
        if len(cells) == 0:
            return np.empty(0)
        P = self.points(cells)
        c, q, d = P.shape
        vals = self._map(self._chunk, P.reshape(-1, d)).reshape(c, q)
        self.evaluations += c * q
        return (vals @ self.weights) * _volumes(cells) * math.factorial(d)


def prerefine(cells: np.ndarray, center, scale: float, width: float = 6.0) -> np.ndarray:
    """Bisect cells meeting the box ``center +- width*scale`` down to edge ``2*scale``."""
    center = np.asarray(center, dtype=float).reshape(-1)
    lo, hi = center - width * scale, center + width * scale
    done = []
    todo = cells
    while len(todo):
        cmin = todo.min(axis=1)
        cmax = todo.max(axis=1)
        meets = np.all((cmax >= lo) & (cmin <= hi), axis=1)
        big = _longest_edge(todo) > 2.0 * scale
        split = meets & big
        done.append(todo[~split])
        if not split.any():
            break
        a, b = _bisect(todo[split])
        todo = np.concatenate([a, b])
    return np.concatenate(done) if done else cells


def integrate(
    log_density: Callable[[np.ndarray], np.ndarray],
    domain,
    rel_tol: float = 1e-8,
    *,
    factor: Callable[[np.ndarray], np.ndarray] | None = None,
    hint: tuple[Sequence[float], float] | None = None,
    abs_tol: float = 0.0,
    max_cells: int = DEFAULT_MAX_CELLS,
    threads: int = 1,
    order: int = 7,
    log_shift: float | None = None,
) -> IntegralResult:
    """Integrate ``factor(x) * exp(log_density(x))`` over ``domain``.

    ``domain`` is a :class:`~toricq.polytope.ToricModel` (integrated over
    ``P_X``) or an array of simplices of shape ``(C, n+1, n)``. ``hint`` is a
    ``(point, scale)`` pair; cells near the point are pre-refined to the
    given scale before adaptation. ``log_shift`` is subtracted from the log
    density before exponentiation (it defaults to the maximum over the
    initial nodes). The result carries both the plain ``value`` and the
    overflow-safe pair ``scaled_value * exp(log_scale)``.
    """
    if not (1e-14 < rel_tol < 1e-2):
        raise ValueError("rel_tol must lie in (1e-14, 1e-2)")
    cells = _domain_cells(domain)
    n = cells.shape[-1]
    if hint is not None:
        center, scale = hint
        if scale is not None and np.isfinite(scale) and scale > 0:
            cells = prerefine(cells, center, float(scale))
    ev = _Evaluator(log_density, factor, order, n, threads)
    ev.init_shift(cells, log_shift)

    with np.errstate(over="ignore"):
        abs_tol_scaled = float(abs_tol * np.exp(-ev.shift)) if abs_tol else 0.0
    vol_total = float(np.sum(_volumes(cells)))
    active = cells
    q_active = ev.integrals(active)
    cells_used = len(active)
    acc_vals: list[float] = []
    acc_errs: list[float] = []
    while True:
        a, b = _bisect(active)
        qa = ev.integrals(a)
        qb = ev.integrals(b)
        refined = qa + qb
        err = np.abs(refined - q_active)
        total = math.fsum(acc_vals) + math.fsum(refined.tolist())
        total_err = math.fsum(acc_errs) + math.fsum(err.tolist())
        tol = max(rel_tol * abs(total), abs_tol_scaled)
        if total_err <= tol:
            acc_vals.extend(refined.tolist())
            acc_errs.extend(err.tolist())
            break
        local = tol * _volumes(active) / vol_total
        ok = err <= local
        acc_vals.extend(refined[ok].tolist())
        acc_errs.extend(err[ok].tolist())
        bad = ~ok
        cells_used += 2 * int(bad.sum())
        if cells_used > max_cells:
            raise QuadratureNotConverged(
                f"cell budget {max_cells} exhausted (relative error estimate "
                f"{total_err / abs(total) if total else math.inf:.3g})"
            )
        active = np.concatenate([a[bad], b[bad]])
        q_active = np.concatenate([qa[bad], qb[bad]])

    mantissa = math.fsum(acc_vals)
    err = math.fsum(acc_errs)
    log_value = math.log(mantissa) + ev.shift if mantissa > 0 else math.nan
    with np.errstate(over="ignore"):
        value = float(mantissa * np.exp(ev.shift))
        abs_err = float(err * np.exp(ev.shift))
    return IntegralResult(value, abs_err, cells_used, log_value, ev.shift, mantissa)


def _domain_cells(domain) -> np.ndarray:
    if hasattr(domain, "triangulate"):
        simplices = domain.triangulate()
        return np.array([[[float(c) for c in v] for v in s] for s in simplices], dtype=float)
    cells = np.asarray(domain, dtype=float)
    if cells.ndim == 2:
        cells = cells[None]
    return cells
