"""Exception hierarchy.

Two families: ``InvalidInput`` for bad parameters or violated preconditions,
and ``NumericalFailure`` for solvers or quadratures that did not reach their
tolerance. The command-line front end maps them to exit codes 2 and 3.
"""


class LabError(Exception):
    pass


class InvalidInput(LabError, ValueError):
    pass


class NumericalFailure(LabError, ArithmeticError):
    pass


# exponents
class NonIterable(InvalidInput):
    pass


class CapExceeded(NumericalFailure):
    pass


# closed forms
class UndefinedPoint(InvalidInput):
    pass


class DegenerateConstant(InvalidInput):
    pass


class NonpositiveFactor(InvalidInput):
    pass


class StepTooLarge(InvalidInput):
    pass


class QuadratureFailure(NumericalFailure):
    pass


class BracketFailure(NumericalFailure):
    pass


class MarkerArithmeticError(TypeError):
    """Arithmetic attempted on the infinity/undefined markers."""


# grid solver / obstacle
class SingularDiffusivity(InvalidInput):
    pass


class GridMismatch(InvalidInput):
    pass


class PreconditionViolation(InvalidInput):
    pass


class PicardDivergence(NumericalFailure):
    pass


class ProjectionStall(NumericalFailure):
    pass


# integrability / harnack
class NonEvaluable(InvalidInput):
    pass


class NotSupersolution(InvalidInput):
    pass


class NotSolution(InvalidInput):
    pass


class ContainmentViolation(InvalidInput):
    pass


class EmptyProbeList(InvalidInput):
    pass


class InconsistentVerdicts(NumericalFailure):
    pass
