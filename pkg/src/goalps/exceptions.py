"""Exception types raised across the package."""


class GoalpsError(Exception):
    """Base class for all package-specific errors."""


class DimensionMismatchError(GoalpsError, ValueError):
    """Array shapes do not agree with the dataset dimensions."""


class DegenerateDesignError(GoalpsError, ValueError):
    """Regression design is empty or identically zero."""


class InvalidGammaError(GoalpsError, ValueError):
    """Adaptive-weight exponent must be strictly greater than 1."""


class DegenerateArmError(GoalpsError, ValueError):
    """One of the treatment arms contains no units."""


class NonFiniteWeightError(GoalpsError, ValueError):
    """Propensity scores at 0 or 1 would produce infinite weights."""


class NonFiniteObjectiveError(GoalpsError, RuntimeError):
    """Penalized objective evaluated to a non-finite value (bad scaling)."""


class NoConvergedCandidateError(GoalpsError, RuntimeError):
    """No tuning-grid point produced a converged fit."""


class TooManyFailuresError(GoalpsError, RuntimeError):
    """More than 10% of Monte Carlo replications failed."""


class ScenarioConfigError(GoalpsError, ValueError):
    """Scenario configuration is malformed or inconsistent."""
