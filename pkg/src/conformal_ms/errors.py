"""Exception hierarchy shared by every module of the package."""


class ConformalMSError(Exception):
    """Base class for all errors raised by conformal_ms."""


class ArgumentError(ConformalMSError, ValueError):
    """Invalid argument (shape mismatch, non-positive step, unknown name...)."""


class EvaluationError(ConformalMSError, ArithmeticError):
    """A user supplied function returned a non-finite or inadmissible value."""


class ConstructionError(ConformalMSError, ValueError):
    """An object failed one of the consistency checks run at construction."""


class ConfigurationError(ConformalMSError, ValueError):
    """A scheme, diagnostic or run was requested in an unsupported setting."""


class SolverError(ConformalMSError, RuntimeError):
    """Linear algebra failure, typically a singular Jacobian."""


class NewtonConvergenceError(ConformalMSError, RuntimeError):
    """Newton iteration did not reach the requested tolerance.

    Attributes
    ----------
    best : ndarray
        Iterate with the smallest residual seen.
    residual : float
        Infinity norm of the residual at ``best``.
    iterations : int
        Number of Newton iterations performed.
    """

    def __init__(self, message, best=None, residual=float("nan"), iterations=0):
        super().__init__(message)
        self.best = best
        self.residual = residual
        self.iterations = iterations


class StepError(NewtonConvergenceError):
    """A time step failed; carries the Newton diagnostics of the failed solve."""


class ParseError(ConformalMSError, ValueError):
    """Configuration document does not follow the schema."""

    def __init__(self, path, message):
        super().__init__(f"{path}: {message}" if path else message)
        self.path = path


class ValidationError(ParseError):
    """Configuration parsed but holds inadmissible values."""


class StudyError(ConformalMSError, RuntimeError):
    """A convergence study level failed."""

    def __init__(self, level, message):
        super().__init__(f"level {level}: {message}")
        self.level = level
