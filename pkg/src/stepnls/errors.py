"""Exception hierarchy.

Two families matter to callers: ``DomainError`` means the inputs lie outside
the region where an operation is defined (CLI exit code 2), ``SolverError``
means a numerical procedure failed on valid inputs (CLI exit code 3).
"""


class StepNLSError(Exception):
    pass


class DomainError(StepNLSError, ValueError):
    pass


class SolverError(StepNLSError, RuntimeError):
    pass


# domain errors
class EqualBCase(DomainError):
    pass


class OnCutWithoutSide(DomainError):
    pass


class AtBranchPoint(DomainError):
    pass


class ZeroDenominator(DomainError):
    pass


class OutsideSector(DomainError):
    pass


class DomainTooClose(DomainError):
    pass


class WrongRegime(DomainError):
    pass


class OnContour(DomainError):
    pass


class ZeroReflection(DomainError):
    pass


# solver errors
class NonConvergence(SolverError):
    def __init__(self, message, residual=None):
        super().__init__(message)
        self.residual = residual


class NoSignChange(SolverError):
    pass


class BracketFailure(NoSignChange):
    pass


class SingularJacobian(SolverError):
    pass


class SingularP(SingularJacobian):
    pass


class SingularPeriodMatrix(SolverError):
    pass


class NewtonFailure(NonConvergence):
    pass


class CorrectorDivergence(SolverError):
    def __init__(self, message, last_state=None):
        super().__init__(message)
        self.last_state = last_state


class CutCollision(SolverError):
    pass


class PathBlocked(SolverError):
    pass


class ConditionsNotSatisfied(SolverError):
    def __init__(self, message, residual=None):
        super().__init__(message)
        self.residual = residual


class SurfaceDegenerate(SolverError):
    pass


class RhsEvaluationFailure(SolverError):
    pass


class EndpointWarning(UserWarning):
    """a(k) is small next to a branch point: the data may sit at a virtual level."""
