"""Exception hierarchy shared by all modules."""


class ConstantWidthError(Exception):
    """Base class for every error raised by the package."""


class DomainError(ConstantWidthError, ValueError):
    """An input lies outside the domain of an operation (empty cloud, mismatched norms...)."""


class ConfigurationError(ConstantWidthError, ValueError):
    """Invalid combination of options, e.g. a sphere scheme used in the wrong dimension."""


class PreconditionError(ConstantWidthError, ValueError):
    """A documented precondition does not hold for the given input."""


class AdmissibilityError(ConstantWidthError, ValueError):
    """A curvature profile violates |beta| <= 1, anti-periodicity or the closure integral."""


class EvaluationError(ConstantWidthError, ArithmeticError):
    """A seed callback produced a non-finite value."""


class ResourceError(ConstantWidthError, RuntimeError):
    """A grid would exceed the configured point budget."""


class ConvergenceError(ConstantWidthError, RuntimeError):
    """An iterative procedure stopped without meeting its tolerance."""
