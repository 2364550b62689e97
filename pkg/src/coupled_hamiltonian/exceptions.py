"""Exception hierarchy shared by the library and the command-line front end."""


class CoupledHamiltonianError(Exception):
    """Base class for all errors raised by this package."""


class LayoutError(CoupledHamiltonianError, ValueError):
    """A state or block does not match the coordinate layout."""


class NumericError(CoupledHamiltonianError, ArithmeticError):
    """A non-finite value appeared during evaluation."""


class CapabilityError(CoupledHamiltonianError):
    """The requested method cannot handle this system."""


class ConvergenceError(CoupledHamiltonianError):
    """An iterative solver did not reach its tolerance."""

    def __init__(self, message, residual=None):
        super().__init__(message)
        self.residual = residual


class UsageError(CoupledHamiltonianError, ValueError):
    """Invalid arguments to an operation (empty samples, missing constraints...)."""
