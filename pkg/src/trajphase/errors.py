"""Exception hierarchy shared by all trajphase modules."""


class TrajPhaseError(Exception):
    """Base class for every error raised by this package."""


class DimensionMismatch(TrajPhaseError, ValueError):
    pass


class NotHermitian(TrajPhaseError, ValueError):
    pass


class NotPSD(TrajPhaseError, ValueError):
    pass


class NotUnitary(TrajPhaseError, ValueError):
    pass


class NotNormalized(TrajPhaseError, ValueError):
    pass


class SingularOperator(TrajPhaseError, ArithmeticError):
    """An operator that must be full rank has an eigenvalue below ``rank_tol``.

    ``position`` is the index of the offending state in a sequence, when known.
    """

    def __init__(self, message, position=None):
        super().__init__(message)
        self.position = position


class ZeroPhaseUndefined(TrajPhaseError, ArithmeticError):
    """Phase of a (near) zero overlap was requested.

    ``position`` identifies the vanishing overlap in a cyclic chain, when known.
    """

    def __init__(self, message, position=None):
        super().__init__(message)
        self.position = position


class CompletenessViolation(TrajPhaseError, ValueError):
    pass


class UnknownPreset(TrajPhaseError, KeyError):
    def __str__(self):
        return str(self.args[0]) if self.args else ""


class InvalidParameter(TrajPhaseError, ValueError):
    pass


class InvalidIndex(TrajPhaseError, IndexError):
    pass


class CombinatorialOverflow(TrajPhaseError, OverflowError):
    pass


class DeadEnd(TrajPhaseError, ArithmeticError):
    def __init__(self, message, step=None):
        super().__init__(message)
        self.step = step


class IncompleteSet(TrajPhaseError, ValueError):
    pass


class ParallelityViolation(TrajPhaseError, ArithmeticError):
    def __init__(self, message, step=None, margin=None):
        super().__init__(message)
        self.step = step
        self.margin = margin


class DegenerateFringe(TrajPhaseError, ArithmeticError):
    def __init__(self, message, step=None):
        super().__init__(message)
        self.step = step


class UndefinedPhaseMass(TrajPhaseError, ArithmeticError):
    def __init__(self, message, excluded_weight=None):
        super().__init__(message)
        self.excluded_weight = excluded_weight


class ScenarioError(TrajPhaseError, ValueError):
    """Raised when a scenario document fails validation."""
