"""Exception types that callers may need to branch on.

Plain input/domain/configuration violations raise ValueError (or
OverflowError for the Poisson exp guard); the classes here mark failure
modes of the numerical drivers themselves.
"""


class CurvatureError(RuntimeError):
    """The quadratic model has no usable curvature (H singular/indefinite)."""


class SubproblemError(RuntimeError):
    """The inner solver for a constrained quadratic model did not converge."""


class DegeneratePilotError(RuntimeError):
    """A pilot Hessian estimate has a non-positive smallest eigenvalue."""


class ReferenceSolveError(RuntimeError):
    """The reference minimizer failed to reach its optimality tolerances."""
