"""Exception hierarchy shared by every module."""


class LieDupinError(Exception):
    """Base class for all library errors."""


class ContractViolation(LieDupinError):
    """Operands do not satisfy an operation's precondition (e.g. signature mismatch)."""


class InvalidInput(LieDupinError, ValueError):
    pass


class InvalidMap(LieDupinError, ValueError):
    """A matrix failed orthogonality validation for its signature."""

    def __init__(self, message, residual=None):
        super().__init__(message)
        self.residual = residual


class UnsupportedChart(LieDupinError, ValueError):
    pass


class DegenerateChart(LieDupinError):
    """The differential of a chart dropped rank at the requested point."""

    def __init__(self, message, point=None, sigma_min=None):
        super().__init__(message)
        self.point = point
        self.sigma_min = sigma_min


class EnvelopeDegenerate(LieDupinError, ValueError):
    pass


class DecompositionFailed(LieDupinError):
    def __init__(self, message, best_residual=None):
        super().__init__(message)
        self.best_residual = best_residual


class NotApplicable(LieDupinError):
    pass


class IntegratorFailure(LieDupinError):
    pass


class InsufficientSamples(LieDupinError, ValueError):
    pass


class SweepError(LieDupinError):
    """Wraps a chart failure raised in the middle of a sweep, with its coordinates."""

    def __init__(self, message, u=None, xi=None):
        super().__init__(message)
        self.u = u
        self.xi = xi
