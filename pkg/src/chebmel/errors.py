"""Exception hierarchy shared by every module of the package."""


class ChebError(Exception):
    """Base class for all errors raised by chebmel."""


class UsageError(ChebError, ValueError):
    """Malformed input: wrong shapes, bad options, unknown family kinds."""


class EvaluationError(ChebError, ArithmeticError):
    """A function could not be evaluated at a point (e.g. log of a negative)."""

    def __init__(self, message, point=None):
        super().__init__(message if point is None else f"{message} (at {point!r})")
        self.point = point


class DomainError(EvaluationError):
    """A kernel left its positivity domain, e.g. 1 - y*g(t) <= 0."""


class PoleError(EvaluationError):
    """A denominator vanishes inside the integration domain."""


class ConvergenceError(ChebError, ArithmeticError):
    """Adaptive quadrature or an iterative scheme failed to reach tolerance."""

    def __init__(self, message, worst=None):
        super().__init__(message)
        self.worst = worst


class DegenerateSystemError(ChebError, ArithmeticError):
    """A linear system is rank deficient beyond tolerance."""

    def __init__(self, message, nodes=None):
        super().__init__(message)
        self.nodes = nodes


class AdmissibilityError(UsageError):
    """Family parameters violate the admissibility conditions."""


class ModelError(ChebError, ValueError):
    """A Melnikov model is inconsistent (first integral not conserved, pole in annulus)."""


class SpanMembershipError(ChebError, ArithmeticError):
    """A least-squares coordinate fit left a residual above tolerance."""

    def __init__(self, message, residual=None):
        super().__init__(message)
        self.residual = residual


class ResolutionError(ChebError, ArithmeticError):
    """A zero scan found too many candidates for its resolution."""
