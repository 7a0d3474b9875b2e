"""Exception hierarchy; each class maps onto a CLI exit code."""


class TorusWeylError(Exception):
    exit_code = 1


class DomainError(TorusWeylError, ValueError):
    """Input outside the domain of an operation."""


class PreconditionError(TorusWeylError, ValueError):
    """Operation called on a geometry or operator it does not support."""


class ConvergenceError(TorusWeylError, ArithmeticError):
    """A series or iteration did not converge within its budget.

    ``diagnostics`` carries whatever partial state was available.
    """

    exit_code = 2

    def __init__(self, message, diagnostics=None):
        super().__init__(message)
        self.diagnostics = diagnostics or {}


class NumericalError(TorusWeylError, ArithmeticError):
    """A computed certificate (hermiticity, residual, trace) failed."""

    exit_code = 2
