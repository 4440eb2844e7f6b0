"""Exception hierarchy shared by every module in the package."""


class ConcordError(Exception):
    """Base class for all package errors."""


class DomainError(ConcordError, ValueError):
    """An argument lies outside the domain of the operation."""


class NumericalError(ConcordError, ArithmeticError):
    """A computation produced a non-finite or otherwise unusable result."""


class CapacityError(ConcordError):
    """The request exceeds a documented size limit."""
