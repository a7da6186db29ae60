"""Exception hierarchy shared by all modules."""


class SecrecyLabError(Exception):
    """Base class for every error raised by this package."""


class DomainError(SecrecyLabError, ValueError):
    """An argument lies outside the domain where the operation is defined."""


class ShapeError(SecrecyLabError, ValueError):
    """Array shapes or alphabet sizes do not match."""


class InconsistentSupportError(SecrecyLabError, ValueError):
    """A probability is positive where its reference measure vanishes."""


class PreconditionError(SecrecyLabError, ValueError):
    """An inequality is evaluated outside its validity regime."""


class ResourceError(SecrecyLabError, RuntimeError):
    """An enumeration guard or atom cap was exceeded."""


class InfeasibleCostError(ResourceError):
    """Rejection sampling could not satisfy the cost constraint."""


class NumericalAccuracyError(SecrecyLabError, ArithmeticError):
    """A numerical routine missed its accuracy target."""


class ConfigError(SecrecyLabError, ValueError):
    """An experiment configuration failed validation."""
