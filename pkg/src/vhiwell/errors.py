"""Exception types shared across the package."""


class VhiError(Exception):
    """Base class for all package errors."""


class DimensionMismatch(VhiError):
    """Binary operation on vectors of different dimensions."""


class InfeasiblePoint(VhiError):
    """A point required to lie in the constraint set does not."""


class MissingData(VhiError):
    """A declared constant or callback needed by an operation is absent."""


class SolverFailure(VhiError):
    """A solve did not reach the requested tolerance."""


class DivergenceError(SolverFailure):
    """Iterates left the trust region (norm blow-up)."""


class BoundViolation(VhiError):
    """A declared perturbation bound failed a sampled falsification check.

    Carries the offending pair so experiments can report it.
    """

    def __init__(self, message, pair=None):
        super().__init__(message)
        self.pair = pair
