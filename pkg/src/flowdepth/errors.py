"""Exception hierarchy shared by every module.

Anything deriving from :class:`DomainError` is a property of the input
(the CLI maps it to exit code 3); :class:`SolverBug` signals an internal
inconsistency that should never happen for valid input.
"""


class FlowDepthError(Exception):
    pass


class DomainError(FlowDepthError, ValueError):
    pass


class NonPositiveSlope(DomainError):
    pass


class BoundaryViolation(DomainError):
    pass


class NonMonotoneSamples(DomainError):
    pass


class ConfigViolation(DomainError):
    pass


class NonInvertible(DomainError):
    pass


class NonPositiveRho(DomainError):
    pass


class ZeroDivisor(DomainError):
    def __init__(self, mode, value):
        super().__init__(f"kernel coefficient at mode {mode} is {value:.3e}")
        self.mode = mode
        self.value = value


class BudgetExceeded(FlowDepthError):
    def __init__(self, message, report=None):
        super().__init__(message)
        self.report = report


class SolverBug(FlowDepthError, RuntimeError):
    pass


class LpInfeasible(SolverBug):
    pass


class LpUnbounded(SolverBug):
    pass


class MonotonicityViolation(SolverBug):
    pass
