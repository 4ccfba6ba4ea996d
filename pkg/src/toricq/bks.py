"""BKS pairings between quantizations at different symplectic potentials.

Distinct modes pair to zero, so only diagonal entries are ever integrated::

    <sigma_I^m, sigma_J^m> = int exp(-h_m^I - h_m^J) sqrt(det((G_I + G_J) / 2)) dx

Along the family ``g_s`` the entry depends on ``s + s'`` only, which is what
``additivity_defect`` and ``horizontality_defect`` probe numerically.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .errors import CrossCheckFailed
from .polynomial import Polynomial
from .polytope import ToricModel
from .potential import SymplecticPotential, cholesky_logdet, f_mode
from .quadrature import DEFAULT_MAX_CELLS, IntegralResult, integrate
from .quantization import check_mode, concentration_hint, norm_squared, section_log_density


@dataclass(frozen=True)
class BksEntry:
    m: tuple[int, ...]
    g_I: SymplecticPotential
    g_J: SymplecticPotential
    result: IntegralResult

    @property
    def value(self) -> float:
        return self.result.value

    @property
    def log_value(self) -> float:
        return self.result.log_value


def _as_potential(model, g):
    if isinstance(g, SymplecticPotential):
        return g
    return SymplecticPotential(model, float(g))


def bks_entry(model: ToricModel, g_I, g_J, m, rel_tol: float = 1e-8, *,
              max_cells: int = DEFAULT_MAX_CELLS, threads: int = 1) -> BksEntry:
    """Diagonal BKS entry for mode ``m``.

    ``g_I`` and ``g_J`` are :class:`SymplecticPotential` objects or plain
    family parameters ``s``. The integrand is symmetric in ``(I, J)`` bit for
    bit, so swapping them reproduces the same value exactly.
    """
    m = check_mode(model, m)
    pI = _as_potential(model, g_I)
    pJ = _as_potential(model, g_J)

    def log_density(X):
        L, _, _, GI = pI.jets(X)
        _, _, _, GJ = pJ.jets(X)
        h = pI.mode_h(X, m, ell=L) + pJ.mode_h(X, m, ell=L)
        return -h + 0.5 * cholesky_logdet(0.5 * (GI + GJ))

    m_arr = np.asarray(m, dtype=float).reshape(1, -1)
    shift = float(pI.value(m_arr)[0] + pJ.value(m_arr)[0]) + 0.5 * model.n * math.log(math.pi)
    # symmetric in (I, J) so both orders refine the same mesh
    s_eff = 0.5 * (pI.s + pJ.s)
    res = integrate(log_density, model, rel_tol, hint=concentration_hint(m, s_eff), log_shift=shift,
                    max_cells=max_cells, threads=threads)
    return BksEntry(m, pI, pJ, res)


def bks(model: ToricModel, s_I: float, s_J: float, m, rel_tol: float = 1e-8, **kwargs) -> IntegralResult:
    return bks_entry(model, s_I, s_J, m, rel_tol, **kwargs).result


def additivity_defect(model: ToricModel, m, s1: float, s2: float, delta: float, rel_tol: float = 1e-8,
                      **kwargs) -> float:
    """``|bks(s1, s2) - bks(s1 + delta, s2 - delta)| / bks(s1, s2)``."""
    if delta == 0:
        return 0.0
    a = bks(model, s1, s2, m, rel_tol, **kwargs)
    b = bks(model, s1 + delta, s2 - delta, m, rel_tol, **kwargs)
    return abs(math.expm1(b.log_value - a.log_value))


@dataclass(frozen=True)
class UnitarityReport:
    m: tuple[int, ...]
    s: float
    derivative: float
    fd_check: float
    abs_error_estimate: float
    norm2: float

    @property
    def agrees(self) -> bool:
        return abs(self.derivative - self.fd_check) <= 1e-6 * (1.0 + abs(self.derivative))


def normalized_psi(model: ToricModel, m) -> Polynomial:
    """``psi - psi(m)``, so that the deformation direction vanishes at ``m``."""
    return model.psi.shifted(-model.psi.exact(m))


def unitarity_derivative(model: ToricModel, s: float, m, rel_tol: float = 1e-11, *, fd_rel_tol: float | None = None,
                         check: bool = True, max_cells: int = DEFAULT_MAX_CELLS, threads: int = 1) -> UnitarityReport:
    """``d/ds ||sigma_s^m||^2`` from its closed-form integrand, with a finite-difference cross-check.

    The integrand is ``(2 (psi - (x - m).grad psi) + 1/2 tr(G_s^-1 Hess psi)) rho_{s,m}``
    with ``psi`` normalized to vanish at ``m``. The check is a central
    difference of ``norm_squared`` with step ``max(1e-3, 1e-3 s)``.
    """
    m = check_mode(model, m)
    psi = normalized_psi(model, m)
    pot = SymplecticPotential(model, s, psi=psi)

    def factor(X):
        _, _, _, G = pot.jets(X)
        H = psi.hessian(X)
        tr = np.trace(np.linalg.solve(G, H), axis1=-2, axis2=-1)
        return -2.0 * f_mode(psi, X, m) + 0.5 * tr

    norm = norm_squared(model, s, m, rel_tol, potential=pot, max_cells=max_cells, threads=threads)
    shift = norm.log_scale
    deriv = integrate(section_log_density(pot, m), model, rel_tol, factor=factor,
                      hint=concentration_hint(m, s), log_shift=shift,
                      abs_tol=rel_tol * abs(norm.value), max_cells=max_cells, threads=threads)

    h = max(1e-3, 1e-3 * s)
    tol = fd_rel_tol if fd_rel_tol is not None else rel_tol
    plus = norm_squared(model, s + h, m, tol, potential=SymplecticPotential(model, s + h, psi=psi),
                        max_cells=max_cells, threads=threads)
    minus = norm_squared(model, s - h, m, tol, potential=SymplecticPotential(model, s - h, psi=psi),
                         max_cells=max_cells, threads=threads)
    fd = (plus.value - minus.value) / (2 * h)
    report = UnitarityReport(m, float(s), deriv.value, fd, deriv.abs_error_estimate, norm.value)
    if check and not report.agrees:
        raise CrossCheckFailed(
            f"closed-form derivative {report.derivative:.12g} vs finite difference {report.fd_check:.12g}"
        )
    return report


def horizontality_defect(model: ToricModel, s0: float, m, h: float = 1e-3, rel_tol: float = 1e-10, *,
                         psi: Polynomial | None = None, max_cells: int = DEFAULT_MAX_CELLS,
                         threads: int = 1) -> float:
    """``|dN/ds|`` at ``s0`` for ``N(s) = bks(s, s0) / sqrt(bks(s, s) bks(s0, s0))``.

    ``psi`` overrides the deformation direction of the family.
    """
    m = check_mode(model, m)

    def pot(s):
        return SymplecticPotential(model, s, psi=psi)

    def log_b(a, b):
        return bks_entry(model, pot(a), pot(b), m, rel_tol, max_cells=max_cells, threads=threads).log_value

    base = log_b(s0, s0)

    def log_N(s):
        return log_b(s, s0) - 0.5 * (log_b(s, s) + base)

    return abs(math.expm1(log_N(s0 + h)) - math.expm1(log_N(s0 - h))) / (2 * h)


def cauchy_schwarz_gap(model: ToricModel, s: float, s_prime: float, m, rel_tol: float = 1e-8, **kwargs) -> float:
    """``1 - bks(s, s')^2 / (bks(s, s) bks(s', s'))``; any nonzero value witnesses non-unitarity.

    The half-form kernel ``sqrt(det((G_I + G_J) / 2))`` dominates the geometric
    mean of the two diagonal kernels, so the gap can be negative.
    """
    a = bks(model, s, s_prime, m, rel_tol, **kwargs).log_value
    b = bks(model, s, s, m, rel_tol, **kwargs).log_value
    c = bks(model, s_prime, s_prime, m, rel_tol, **kwargs).log_value
    return -math.expm1(2 * a - b - c)
