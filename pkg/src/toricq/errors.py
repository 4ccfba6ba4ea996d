"""Exception hierarchy.

Three families map onto CLI exit codes: invalid input (2), numerical
non-convergence (3) and internal consistency sentinels (1).
"""


class ToricError(Exception):
    """Base class for all errors raised by toricq."""

    exit_code = 1


class ValidationError(ToricError, ValueError):
    exit_code = 2


class NumericalError(ToricError, ArithmeticError):
    exit_code = 3


class InternalError(ToricError, AssertionError):
    exit_code = 1


class MalformedInput(ValidationError):
    pass


class NonDelzant(ValidationError):
    pass


class NonConvexPotential(ValidationError):
    pass


class EmptyPolytope(ValidationError):
    pass


class NotAVertex(ValidationError):
    pass


class BoundaryPoint(ValidationError):
    pass


class OutsidePolytope(ValidationError):
    pass


class ModeOutsidePL(ValidationError):
    pass


class RegularityFailure(ValidationError):
    def __init__(self, message, report=None):
        super().__init__(message)
        self.report = report


class NewtonDiverged(NumericalError):
    pass


class QuadratureNotConverged(NumericalError):
    pass


class CrossCheckFailed(NumericalError):
    pass


class NonIntegralExponent(InternalError):
    pass


class CriteriaDisagree(InternalError):
    pass


class BasisMismatch(InternalError):
    pass
