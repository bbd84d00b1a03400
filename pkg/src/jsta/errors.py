"""Exception hierarchy shared by all stages.

The CLI maps these onto exit codes: configuration problems exit with 2,
numerical precondition failures with 3.
"""


class JSTAError(Exception):
    """Base class for every error raised by this package."""


class ContractError(JSTAError, ValueError):
    """An argument violates a documented precondition (shape, sign, range)."""


class ConfigurationError(JSTAError, ValueError):
    """A configuration value is invalid or inconsistent."""


class NumericalPreconditionError(JSTAError, ArithmeticError):
    """A numerical precondition on the data itself does not hold."""


class EdgeEnergyError(NumericalPreconditionError):
    """Field does not decay at the grid edges, so a spectral shift would alias."""


class TruncationError(NumericalPreconditionError):
    """Grid is too narrow for the requested profile."""


class LobeOverlapError(NumericalPreconditionError):
    """Conjugate-domain lobes of an interferogram are not separated."""

    def __init__(self, message, ratio=None):
        super().__init__(message)
        self.ratio = ratio


class ConvergenceError(NumericalPreconditionError):
    """Iterative solver failed to reach its tolerance."""

    def __init__(self, message, residual=None):
        super().__init__(message)
        self.residual = residual


class MissingDataError(JSTAError, FileNotFoundError):
    """A required input (file, surface, leg) is absent."""
