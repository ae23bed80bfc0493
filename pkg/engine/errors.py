"""
Exception hierarchy for heatpack
"""


class ExitCode:
    """Process exit codes used by the command line"""
    SUCCESS = 0
    PRECONDITION = 2
    NONCONVERGENCE = 3
    INVARIANT = 4


class HeatPackError(Exception):
    """Base error carrying an exit code and a details payload"""
    exit_code = 1

    def __init__(self, message, **details):
        super().__init__(message)
        self.message = message
        self.details = details

    def to_dict(self):
        """Convert error to dictionary for reports"""
        return {
            'type': self.__class__.__name__,
            'message': self.message,
            'exit_code': self.exit_code,
            'details': self.details,
        }


class PreconditionError(HeatPackError):
    exit_code = ExitCode.PRECONDITION


class NumericalError(HeatPackError):
    exit_code = ExitCode.NONCONVERGENCE


class InvariantError(HeatPackError):
    exit_code = ExitCode.INVARIANT


# Preconditions
class ConfigError(PreconditionError):
    pass


class NoFeasibleEpsilon(PreconditionError):
    pass


class EmptySet(PreconditionError):
    pass


class SupportViolation(PreconditionError):
    pass


class BoundaryViolation(PreconditionError):
    pass


class NonpositiveTime(PreconditionError):
    pass


class PointOutsideDomain(PreconditionError):
    pass


class PreconditionViolation(PreconditionError):
    pass


class HypothesisViolation(PreconditionError):
    pass


class InfeasibleMeasure(PreconditionError):
    pass


class NegativeArgument(PreconditionError):
    pass


# Numerical failures
class QuadratureNonConvergence(NumericalError):
    pass


class NoConvergence(NumericalError):
    """Saddle iteration hit its cap; carries the best-so-far solution"""

    def __init__(self, message, solution=None, **details):
        super().__init__(message, **details)
        self.solution = solution


class PencilDegenerate(NumericalError):
    pass


class FrameErrorExceeded(NumericalError):
    pass


# Invariant failures
class BoundViolation(InvariantError):
    pass


class SandwichViolation(InvariantError):
    pass


class AssertionFailure(InvariantError):
    pass


class SuiteFailure(InvariantError):
    pass
