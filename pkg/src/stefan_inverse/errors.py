"""Exception types shared across the package."""


class StefanError(Exception):
    """Base class for all package errors."""


class ValidationError(StefanError, ValueError):
    """Bad input: wrong shapes, out-of-range parameters, malformed data."""


class KernelDomainError(ValidationError):
    """Kernel evaluated at t <= tau."""


class NumericalError(StefanError, ArithmeticError):
    """A computation broke down (factorization failure, front collapse)."""


class NotPositiveDefiniteError(NumericalError):
    """Cholesky hit a non-positive pivot."""


class FrontCollapseError(NumericalError):
    """The melting front reached s <= 0 during a forward solve."""
