"""Exception hierarchy shared by every module of the package."""


class NCNormError(Exception):
    """Base class for all errors raised by ``ncnorm``."""


class InvalidExponentError(NCNormError, ValueError):
    """An exponent lies outside the range an operation accepts."""


class DomainError(NCNormError, ValueError):
    """Input matrix violates a positivity or structure requirement."""


class SingularityError(DomainError):
    """A negative power was requested of a matrix with a zero eigenvalue."""


class RegimeError(NCNormError, ValueError):
    """The (p, q) pair is outside the regime where an operation is defined."""


class SolverFailure(NCNormError, RuntimeError):
    """A numerical kernel (eigensolver, SVD) failed to converge."""


class ProjectionError(NCNormError, RuntimeError):
    """Alternating projections hit the iteration cap while still infeasible."""


class DimensionError(NCNormError, ValueError):
    """Requested instance is too large to materialize or has bad shape."""
