"""Exception hierarchy shared by every module."""


class MonoheightError(ValueError):
    """Base class for all library errors."""


class DimensionMismatchError(MonoheightError):
    pass


class SingularMatrixError(MonoheightError):
    pass


class FactorizationBudgetError(MonoheightError):
    """Raised when an integer cannot be factored within the configured budget."""


class ConvergenceError(MonoheightError):
    pass


class DegenerateDynamicsError(MonoheightError):
    """The dynamical degree is 1 (or indistinguishable from 1), so no canonical height exists."""


class HypothesisError(MonoheightError):
    """A construction or closed form was requested outside its hypotheses."""
