"""Half-form corrected Kähler quantization of smooth compact toric manifolds."""

from .bks import (
    additivity_defect,
    bks,
    bks_entry,
    cauchy_schwarz_gap,
    horizontality_defect,
    unitarity_derivative,
)
from .errors import (
    BoundaryPoint,
    CriteriaDisagree,
    EmptyPolytope,
    MalformedInput,
    NewtonDiverged,
    NonConvexPotential,
    NonDelzant,
    NumericalError,
    QuadratureNotConverged,
    ToricError,
    ValidationError,
)
from .fan import (
    divisor_of_monomial,
    even_divisor_criterion,
    holomorphic_section_test,
    normal_fan,
    parity_criterion,
    sqrtk_exists,
    transition_exponents,
)
from .polynomial import Polynomial
from .polytope import FIXTURES, ToricModel, build_model, load_fixture, load_model
from .potential import SymplecticPotential, legendre_inverse, potential_jet, regularity_scan
from .quadrature import IntegralResult, integrate
from .quantization import (
    bs_condition,
    concentration_mass,
    delta_pairing,
    delta_target,
    laplace_prediction,
    laplace_ratio,
    norm_squared,
    pointwise_density,
    real_basis,
)

__version__ = "0.1.0"
