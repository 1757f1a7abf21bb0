"""Exception hierarchy shared by every module of the package."""


class DistMeanError(Exception):
    """Base class for all package errors."""


class InvalidArgumentError(DistMeanError, ValueError):
    """An argument lies outside the domain of the operation."""


class ConstructionError(DistMeanError, ValueError):
    """A covariance or scenario object could not be built (e.g. not SPD)."""


class RankDeficiencyError(DistMeanError, ArithmeticError):
    """A covariance estimate is singular or indefinite (p >= n, degenerate data)."""


class ConditionViolationError(DistMeanError, ValueError):
    """The dimension/machine regime required by the distributed test is violated."""


class MomentUndefinedError(DistMeanError, ValueError):
    """Requested moments of the local statistic do not exist (n_l - p - 4 <= 0)."""


class DivisibilityError(DistMeanError, ValueError):
    """The sample cannot be split into k equal shards."""


class ParseError(DistMeanError, ValueError):
    """Malformed CSV or configuration input."""


class ExperimentError(DistMeanError, RuntimeError):
    """Too many Monte Carlo replicas failed."""


class EstimatorError(DistMeanError, ArithmeticError):
    """A plug-in estimate broke down (e.g. a nonpositive variance estimate)."""
