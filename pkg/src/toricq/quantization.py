"""Kähler quantization data of a toric model and its real-polarization limit.

For a mode ``m`` in ``P_L`` the torus-reduced pointwise norm of the
monomial section along the family ``g_s`` is::

    rho_{s,m}(x) = exp(-2 h_m(x)) * sqrt(det G_s(x))

``norm_squared`` integrates it over ``P_X``; ``laplace_prediction`` is its
leading large-``s`` asymptote ``pi^(n/2) exp(2 g_s(m))``.
"""

from __future__ import annotations

import cmath
import enum
import math
from dataclasses import dataclass, field
from fractions import Fraction

import numpy as np

from . import _exact
from .errors import BasisMismatch, ModeOutsidePL, OutsidePolytope
from .polynomial import Polynomial
from .polytope import ToricModel, enumerate_vertices, fan_triangulation
from .potential import SymplecticPotential, cholesky_logdet
from .quadrature import DEFAULT_MAX_CELLS, IntegralResult, integrate

BOUNDARY_EPS = 1e-13


def check_mode(model: ToricModel, m) -> tuple[int, ...]:
    try:
        m = tuple(int(a) for a in m)
    except (TypeError, ValueError) as exc:
        raise ModeOutsidePL(f"mode {m!r} is not an integer vector") from exc
    if len(m) != model.n or not model.contains(m, "P_L"):
        raise ModeOutsidePL(f"mode {m} is not a lattice point of P_L")
    return m


def concentration_hint(m, s: float):
    return (m, 1.0 / math.sqrt(s)) if s > 0 else None


def section_log_density(pot: SymplecticPotential, m):
    """``x -> -2 h_m(x) + 1/2 log det G_s(x)`` on the interior of ``P_X``."""

    def log_density(X):
        L, _, _, G = pot.jets(X)
        return -2.0 * pot.mode_h(X, m, ell=L) + 0.5 * cholesky_logdet(G)

    return log_density


def log_laplace_prediction(model: ToricModel, s: float, m, potential: SymplecticPotential | None = None) -> float:
    pot = potential if potential is not None else SymplecticPotential(model, s)
    g = float(pot.value(np.asarray(m, dtype=float).reshape(1, -1))[0])
    return 0.5 * model.n * math.log(math.pi) + 2.0 * g


def laplace_prediction(model: ToricModel, s: float, m) -> float:
    """``pi^(n/2) exp(2 g_s(m))``."""
    m = check_mode(model, m)
    return math.exp(log_laplace_prediction(model, s, m))


def norm_squared(model: ToricModel, s: float, m, rel_tol: float = 1e-8, *,
                 potential: SymplecticPotential | None = None, max_cells: int = DEFAULT_MAX_CELLS,
                 threads: int = 1) -> IntegralResult:
    """Squared L2 norm of the monomial section ``sigma_s^m``."""
    m = check_mode(model, m)
    pot = potential if potential is not None else SymplecticPotential(model, s)
    return integrate(
        section_log_density(pot, m),
        model,
        rel_tol,
        hint=concentration_hint(m, pot.s),
        log_shift=log_laplace_prediction(model, pot.s, m, pot),
        max_cells=max_cells,
        threads=threads,
    )


def laplace_ratio(model: ToricModel, s: float, m, rel_tol: float = 1e-8, **kwargs) -> tuple[float, IntegralResult]:
    """``norm_squared / laplace_prediction``, computed in the log domain."""
    m = check_mode(model, m)
    res = norm_squared(model, s, m, rel_tol, **kwargs)
    return math.exp(res.log_value - log_laplace_prediction(model, s, m)), res


# -- pointwise density with boundary extension ------------------------------------


def _scaled_log_det(pot: SymplecticPotential, x: np.ndarray, L: np.ndarray, Z) -> float:
    """``log(det G(x) * prod_{j in Z} l_j(x))``, finite even where ``l_Z = 0``.

    The facets in ``Z`` are part of a vertex basis ``B``; in the dual basis
    their singular Hessian terms become ``diag(1/l_Z)``, and rescaling those
    rows and columns by ``sqrt(l_Z)`` removes the singularity.
    """
    model = pot.model
    n = model.n
    Z = list(Z)
    chart = next(c for c in model.charts.values() if set(Z) <= set(c.facet_indices))
    basis = Z + [j for j in chart.facet_indices if j not in Z]
    B = np.array([model.facets[j].normal for j in basis], dtype=float)
    N = model.normals
    rest = [j for j in range(model.r) if j not in Z]
    X = x.reshape(1, n)
    R = pot._d2q(X)[0]
    for j in rest:
        R = R + 0.5 * np.outer(N[j], N[j]) / L[j]
    Binv = np.linalg.inv(B)
    Rp = Binv.T @ R @ Binv
    e = np.ones(n)
    e[: len(Z)] = np.sqrt(L[Z])
    K = Rp * np.outer(e, e)
    K[np.arange(len(Z)), np.arange(len(Z))] += 0.5
    return float(cholesky_logdet(K[None])[0])


def pointwise_density(model: ToricModel, s: float, m, x) -> float:
    """``exp(-2 h_m) sqrt(det G_s)`` at ``x`` in the closed polytope.

    On a facet ``j`` the density behaves like ``l_j(x)^(l_j^L(m))`` times a
    positive continuous factor, so the extension is 0 when ``l_j^L(m) > 0``
    and finite positive when ``l_j^L(m) = 0``.
    """
    m = check_mode(model, m)
    pot = SymplecticPotential(model, s)
    if isinstance(x, (list, tuple)) and all(isinstance(c, (int, Fraction)) for c in x):
        exact = [pair[0] for pair in model.ell_values(list(x))]
        if any(v < 0 for v in exact):
            raise OutsidePolytope(f"{x} is outside P_X")
        Z = [j for j, v in enumerate(exact) if v == 0]
    else:
        Z = None
    xf = np.array([float(c) for c in np.atleast_1d(x)], dtype=float)
    L = model.ell(xf)[0]
    if Z is None:
        if np.any(L < -BOUNDARY_EPS):
            raise OutsidePolytope(f"{xf.tolist()} is outside P_X")
        Z = [j for j in range(model.r) if L[j] <= BOUNDARY_EPS]
    if not Z:
        return float(np.exp(section_log_density(pot, m)(xf.reshape(1, -1))[0]))
    return float(np.exp(boundary_log_density(pot, m, xf, L, Z)))


def boundary_log_density(pot: SymplecticPotential, m, x: np.ndarray, L: np.ndarray, Z) -> float:
    """Log density with the facets in ``Z`` treated by their exact exponents.

    ``L[Z]`` may be zero (the continuous extension) or small and positive (in
    which case this agrees with the interior formula).
    """
    model = pot.model
    L = np.array(L, dtype=float)
    Z = sorted(Z)
    L[Z] = np.maximum(L[Z], 0.0)
    Lm = model.normals @ np.asarray(m, dtype=float) + model.lambdas
    exps = Lm - 0.5  # l_j^L(m)
    total = 0.0
    for j in range(model.r):
        power = exps[j] if j in Z else Lm[j]
        if L[j] == 0.0:
            if power > 0:
                return -math.inf
            continue
        total += power * math.log(L[j])
    X = x.reshape(1, -1)
    D = x - np.asarray(m, dtype=float)
    total += float(np.sum(Lm - L))
    total -= 2.0 * float(D @ pot._dq(X)[0] - pot._q(X)[0])
    total += 0.5 * _scaled_log_det(pot, x, L, Z)
    return total


# -- degeneration -------------------------------------------------------------------


def delta_pairing(model: ToricModel, s: float, m, t: Polynomial | None = None, rel_tol: float = 1e-8, *,
                  max_cells: int = DEFAULT_MAX_CELLS, threads: int = 1) -> float:
    """Normalized pairing of ``sigma_s^m (det G_s)^(1/4)`` with a test profile ``t``.

    ``[int exp(-h_m) sqrt(det G_s) t dx] / ||sigma_s^m||``; tends to
    ``2^(n/2) pi^(n/4) t(m)`` as ``s`` grows.
    """
    m = check_mode(model, m)
    if t is None:
        t = Polynomial.constant(model.n, 1)
    pot = SymplecticPotential(model, s)
    g_m = float(pot.value(np.asarray(m, dtype=float).reshape(1, -1))[0])

    def log_density(X):
        L, _, _, G = pot.jets(X)
        return -pot.mode_h(X, m, ell=L) + 0.5 * cholesky_logdet(G)

    num = integrate(log_density, model, rel_tol, factor=t, hint=concentration_hint(m, s), log_shift=g_m,
                    max_cells=max_cells, threads=threads)
    den = norm_squared(model, s, m, rel_tol, potential=pot, max_cells=max_cells, threads=threads)
    # num.scaled_value * e^{g_m} / sqrt(den.scaled_value * e^{den.log_scale})
    return num.scaled_value * math.exp(num.log_scale - 0.5 * den.log_scale) / math.sqrt(den.scaled_value)


def delta_target(model: ToricModel, m, t: Polynomial | None = None) -> float:
    """``2^(n/2) pi^(n/4) t(m)``."""
    value = 1.0 if t is None else float(t.exact(m))
    return 2 ** (model.n / 2) * math.pi ** (model.n / 4) * value


def box_region(model: ToricModel, center, half_width: float) -> np.ndarray:
    """Simplices covering ``P_X`` intersected with an axis box around ``center``."""
    n = model.n
    normals = [list(f.normal) for f in model.facets]
    offsets = [f.lam for f in model.facets]
    hw = Fraction(half_width)
    for i in range(n):
        e = [0] * n
        e[i] = 1
        normals.append(e)
        offsets.append(hw - Fraction(center[i]))
        normals.append([-a for a in e])
        offsets.append(hw + Fraction(center[i]))
    verts = enumerate_vertices(normals, offsets)
    if _exact.affine_dimension(verts) < n:
        return np.empty((0, n + 1, n))
    simplices = fan_triangulation(normals, offsets, verts)
    return np.array([[[float(c) for c in v] for v in s] for s in simplices], dtype=float)


def concentration_mass(model: ToricModel, s: float, m, width: float = 6.0, rel_tol: float = 1e-8, *,
                       max_cells: int = DEFAULT_MAX_CELLS, threads: int = 1) -> float:
    """Fraction of ``||sigma_s^m||^2`` within distance ``width / sqrt(s)`` of ``m``.

    The region used is the largest axis box inscribed in that ball, so the
    returned fraction is a lower bound for the ball.
    """
    m = check_mode(model, m)
    pot = SymplecticPotential(model, s)
    half = width / math.sqrt(s) / math.sqrt(model.n)
    cells = box_region(model, m, half)
    shift = log_laplace_prediction(model, s, m, pot)
    inner = integrate(section_log_density(pot, m), cells, rel_tol, hint=concentration_hint(m, s),
                      log_shift=shift, max_cells=max_cells, threads=threads)
    total = norm_squared(model, s, m, rel_tol, potential=pot, max_cells=max_cells, threads=threads)
    return inner.scaled_value / total.scaled_value


def half_density_ratio(model: ToricModel, s: float, x, a, b) -> float:
    """``|det(G_s a + i b)|^(1/2) / det(G_s)^(1/2)`` for a constant frame.

    Column ``k`` of the frame is ``sum_l a[l,k] d/dx_l + b[l,k] d/dtheta_l``.
    The large-``s`` limit is ``|det a|^(1/2)``.
    """
    pot = SymplecticPotential(model, s)
    G = pot.hessian(np.asarray(x, dtype=float).reshape(1, -1))[0]
    a = np.asarray(a, dtype=float).reshape(model.n, model.n)
    b = np.asarray(b, dtype=float).reshape(model.n, model.n)
    M = G @ a + 1j * b
    _, logabs = np.linalg.slogdet(M)
    return math.exp(0.5 * logabs - 0.5 * float(cholesky_logdet(G[None])[0]))


# -- real polarization ----------------------------------------------------------------


class Holonomy(enum.Enum):
    IN_BASIS = "InBasis"
    NONTRIVIAL = "NontrivialHolonomy"
    BOUNDARY_OBSTRUCTED = "BoundaryObstructed"


@dataclass(frozen=True)
class BohrSommerfeldVerdict:
    point: tuple
    status: Holonomy
    phases: dict = field(default_factory=dict)

    def as_dict(self) -> dict:
        return {
            "point": [str(c) for c in self.point],
            "status": self.status.value,
            "phases": {str(k): [round(v.real, 15), round(v.imag, 15)] for k, v in self.phases.items()},
        }


def _is_integer(c) -> bool:
    if isinstance(c, (int, Fraction)):
        return Fraction(c).denominator == 1
    return abs(c - round(c)) <= 1e-12


def bs_condition(model: ToricModel, x) -> BohrSommerfeldVerdict:
    """Limit-holonomy verdict at a fiber over ``x``.

    Interior points carry phases ``exp(2 pi i x_j)`` per generator of the torus
    and are Bohr-Sommerfeld exactly at integer points. On a facet the
    half-form term gives phase ``exp(2 pi i (l_j(x) - 1/2)) = -1`` on the
    collapsed cycle, which rules out covariantly constant sections there.
    """
    x = tuple(x)
    if len(x) != model.n:
        raise OutsidePolytope("point has the wrong dimension")
    exact = all(isinstance(c, (int, Fraction)) for c in x)
    ells = [pair[0] for pair in model.ell_values(list(x))]
    tol = 0 if exact else 1e-12
    if any(v < -tol for v in ells):
        raise OutsidePolytope(f"{[str(c) for c in x]} is outside P_X")
    collapsed = [j for j, v in enumerate(ells) if abs(v) <= tol]
    if collapsed:
        phases = {j: cmath.exp(2j * math.pi * (float(ells[j]) - 0.5)) for j in collapsed}
        return BohrSommerfeldVerdict(x, Holonomy.BOUNDARY_OBSTRUCTED, phases)
    phases = {k: cmath.exp(2j * math.pi * float(c)) for k, c in enumerate(x)}
    if all(_is_integer(c) for c in x):
        return BohrSommerfeldVerdict(x, Holonomy.IN_BASIS, phases)
    return BohrSommerfeldVerdict(x, Holonomy.NONTRIVIAL, phases)


def real_basis(model: ToricModel) -> list[tuple[int, ...]]:
    """Integer points of the closed ``P_X`` whose fibers are Bohr-Sommerfeld."""
    basis = [m for m in model.integer_points("P_X") if bs_condition(model, m).status is Holonomy.IN_BASIS]
    if basis != model.lattice_points():
        raise BasisMismatch(f"real basis {basis} differs from the Kähler basis {model.lattice_points()}")
    return basis
