"""Exception hierarchy shared by the library and the command-line runner."""


class LwqedError(Exception):
    """Base class for all errors raised by lwqed."""


class ConfigurationError(LwqedError, ValueError):
    """Inconsistent or incomplete physical configuration."""


class PreconditionError(LwqedError, ValueError):
    """An operation was called outside its domain of validity."""


class ConvergenceError(LwqedError, RuntimeError):
    """A numerical procedure failed to reach its tolerance."""


class EigenSolverError(ConvergenceError):
    def __init__(self, message, residuals=None):
        super().__init__(message)
        self.residuals = residuals


class ScfConvergenceError(ConvergenceError):
    def __init__(self, message, history=None):
        super().__init__(message)
        self.history = list(history or [])


class QuadratureError(ConvergenceError):
    pass


class InvariantViolation(LwqedError, AssertionError):
    """An internal invariant (Hermiticity, identity between two routes) failed."""
