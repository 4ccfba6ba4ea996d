"""Normal fan, torus-invariant divisor arithmetic and the sqrt(K) criteria.

Divisors are coefficient vectors over the facets of the model, in model
facet order. The fan is always derived from the polytope.
"""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction

from . import _exact
from .errors import CriteriaDisagree, NonIntegralExponent
from .polytope import ToricModel


@dataclass(frozen=True)
class Fan:
    generators: tuple[tuple[int, ...], ...]
    max_cones: dict

    def cone_of(self, v) -> frozenset:
        return self.max_cones[tuple(Fraction(c) for c in v)]


def normal_fan(model: ToricModel) -> Fan:
    cones = {v: frozenset(model.vertex_chart(v).facet_indices) for v in model.px_vertices}
    return Fan(tuple(f.normal for f in model.facets), cones)


def divisor_of_monomial(model: ToricModel, m) -> tuple[int, ...]:
    """Coefficients ``<nu_j, m>`` of the divisor of the character ``w^m``."""
    return tuple(int(_exact.dot(f.normal, m)) for f in model.facets)


def holomorphic_section_test(model: ToricModel, m, lambda_L=None) -> bool:
    """True iff ``w^m`` times the canonical section of ``D^L`` is holomorphic."""
    if lambda_L is None:
        lambda_L = [f.lambda_L for f in model.facets]
    div = divisor_of_monomial(model, m)
    return all(d + lam >= 0 for d, lam in zip(div, lambda_L))


def transition_exponents(model: ToricModel, v, v_prime) -> tuple[int, ...]:
    """Exponent ``lambda_{v'}^L - A_{v'} A_v^{-1} lambda_v^L`` of the transition map."""
    c = model.vertex_chart(v)
    cp = model.vertex_chart(v_prime)
    M = _exact.matmul(cp.A_v, _exact.inverse(c.A_v))
    shifted = _exact.matvec(M, c.lambda_v_L)
    out = [Fraction(a) - b for a, b in zip(cp.lambda_v_L, shifted)]
    if any(q.denominator != 1 for q in out):
        raise NonIntegralExponent(f"non-integral transition exponent {out}")
    return tuple(int(q) for q in out)


def chart_change(model: ToricModel, v, v_prime):
    """Integer matrix ``A_{v'} A_v^{-1}``."""
    M = _exact.matmul(model.vertex_chart(v_prime).A_v, _exact.inverse(model.vertex_chart(v).A_v))
    return [[int(a) for a in row] for row in M]


def canonical_chart_divisor(model: ToricModel, v) -> tuple[int, ...]:
    """Divisor of ``dW_v = w_v^1 dZ_v``.

    ``w_v^1`` is the character ``w^u`` with ``u = A_v^{-1} 1``, and ``dZ_v``
    has divisor ``-sum_j D_j``.
    """
    chart = model.vertex_chart(v)
    u = _exact.matvec(_exact.inverse(chart.A_v), [1] * model.n)
    return tuple(d - 1 for d in divisor_of_monomial(model, u))


def vertex_basis_coordinates(model: ToricModel, v, generator) -> list[Fraction]:
    """Coordinates ``c`` with ``generator = sum_k c_k nu_{v,k}``."""
    chart = model.vertex_chart(v)
    return _exact.solve(_exact.transpose(chart.A_v), list(generator))


def parity_criterion(model: ToricModel) -> bool:
    for v in model.px_vertices:
        cone = set(model.vertex_chart(v).facet_indices)
        for i, f in enumerate(model.facets):
            if i in cone:
                continue
            total = sum(vertex_basis_coordinates(model, v, f.normal))
            if total.denominator != 1 or int(total) % 2 == 0:
                return False
    return True


def even_divisor_criterion(model: ToricModel) -> bool:
    return all(
        all(c % 2 == 0 for c in canonical_chart_divisor(model, v)) for v in model.px_vertices
    )


def sqrtk_exists(model: ToricModel) -> bool:
    """Whether the canonical bundle has a square root (both criteria, cross-checked)."""
    a = parity_criterion(model)
    b = even_divisor_criterion(model)
    if a != b:
        raise CriteriaDisagree(f"parity criterion says {a}, even-divisor criterion says {b}")
    return a
