"""Exception types shared across the package."""


class FracstabError(Exception):
    """Base class for all package-specific failures."""


class DomainError(FracstabError, ValueError):
    """Argument outside the mathematical domain of an operation."""


class PoleError(DomainError):
    """Gamma function evaluated at a non-positive integer."""


class NonConvergence(FracstabError, ArithmeticError):
    """Neither evaluation branch met the requested tolerance in budget.

    Signals an argument outside the supported range rather than a bug;
    the message carries the best error estimate attained.
    """


class OutOfRange(FracstabError, ValueError):
    """Time argument outside the stored trajectory domain."""


class NumericalBlowup(FracstabError, ArithmeticError):
    """State norm exceeded the divergence guard during integration."""

    def __init__(self, message, t=None, norm=None):
        super().__init__(message)
        self.t = t
        self.norm = norm


class DimensionMismatch(FracstabError, ValueError):
    """Matrix or vector dimensions inconsistent with the problem."""


class InsufficientHistory(FracstabError, ValueError):
    """Operation needs at least one committed step before the query node."""


class Infeasible(FracstabError):
    """No certificate found at the configured accuracy.

    Not a proof of instability.  ``best_lambda_max`` records the smallest
    maximum eigenvalue of the constraint matrix reached by the search, and
    ``provable`` is set when an analytic necessary condition already rules
    out every candidate point.
    """

    def __init__(self, message, best_lambda_max=None, provable=False):
        super().__init__(message)
        self.best_lambda_max = best_lambda_max
        self.provable = provable


class NotApplicable(FracstabError):
    """Quantity undefined for the given inputs (e.g. margin of an infeasible problem)."""


class DegenerateDenominator(FracstabError, ZeroDivisionError):
    """Gain inequality violated, so the ultimate bound is not finite."""


class ConditionViolation(FracstabError):
    """A controller design condition failed its pre-run check."""


class ConfigError(FracstabError, ValueError):
    """Experiment configuration failed to parse or validate."""
