"""Exception hierarchy.

Every error carries an ``error_class`` string; the command-line front end
prints it so failures are machine readable.
"""


class ProplabError(Exception):
    error_class = "error"


class ArgumentError(ProplabError, ValueError):
    error_class = "argument"


class QueryError(ArgumentError):
    error_class = "query"


class DomainError(ArgumentError):
    error_class = "domain"


class ConfigurationError(ArgumentError):
    error_class = "configuration"


class RedirectError(ArgumentError):
    """Raised when a request belongs to a different entry point."""

    error_class = "redirect"


class CausticError(ProplabError, ValueError):
    """The requested time sits on (or too close to) a focal point, sin(wt) ~ 0."""

    error_class = "caustic"

    def __init__(self, message, phase_mod_pi=None):
        super().__init__(message)
        self.phase_mod_pi = phase_mod_pi


class EvaluationError(ProplabError, ArithmeticError):
    error_class = "evaluation"

    def __init__(self, message, node=None):
        super().__init__(message)
        self.node = node


class RangeError(ProplabError, OverflowError):
    error_class = "range"


class ConvergenceError(ProplabError, RuntimeError):
    error_class = "convergence"


class ResolutionError(ConvergenceError):
    error_class = "resolution"


class BoundaryLeakageError(ConvergenceError):
    error_class = "leakage"


class CancellationError(ConvergenceError):
    """Finite-difference steps are small enough that round-off dominates."""

    error_class = "cancellation"


class QuadratureWarning(UserWarning):
    pass
