"""Exception hierarchy.

Two families: precondition/configuration problems (``ConfigError``, a
``ValueError``) and numerical failures (``NumericalError``, a
``RuntimeError``). The CLI maps them to exit codes 2 and 3.
"""


class SoftCoulError(Exception):
    pass


class ConfigError(SoftCoulError, ValueError):
    pass


class NumericalError(SoftCoulError, RuntimeError):
    pass


class SingularEvaluationError(ConfigError):
    """Potential has a pole at the requested point."""


class UnboundedPotentialError(ConfigError):
    pass


class OutOfSpanError(ConfigError):
    """Time outside the knot span of a trajectory."""


class BranchCutError(ConfigError):
    pass


class DomainError(ConfigError):
    pass


class SectorViolationError(ConfigError):
    pass


class GridResolutionError(ConfigError):
    pass


class TruncationBudgetError(ConfigError):
    pass


class NonConvergenceError(NumericalError):
    pass


class BlowUpError(NumericalError):
    """Wave packet reached the edge of the computational box."""


class BoundaryContaminationWarning(UserWarning):
    pass
