"""Exception hierarchy shared by every module of the package."""


class BetheAsepError(Exception):
    """Base class for all package errors."""


class SingularMatrix(BetheAsepError):
    pass


class DegenerateLeadingCoefficient(BetheAsepError):
    pass


class NoConvergence(BetheAsepError):
    pass


class SingularJacobian(BetheAsepError):
    """Newton met a (numerically) singular Jacobian.

    Near a Bethe root this usually signals a multiple root or a ramification
    point rather than a bug.
    """


class InvalidDimensions(BetheAsepError, ValueError):
    pass


class DimensionMismatch(BetheAsepError, ValueError):
    pass


class InvalidHopping(BetheAsepError, ValueError):
    pass


class DegenerateSector(BetheAsepError):
    pass


class BudgetExhausted(BetheAsepError):
    """Multistart ran out of starts before reaching the expected root count.

    The partial solution set is attached so callers can still inspect it.
    """

    def __init__(self, found, expected, solutions=None):
        super().__init__(f"found {found} admissible roots, expected {expected}")
        self.found = found
        self.expected = expected
        self.solutions = solutions


class AmplitudeSingularity(BetheAsepError):
    pass


class ZeroVector(BetheAsepError):
    pass


class ZeroComponent(BetheAsepError):
    pass


class TooLarge(BetheAsepError, ValueError):
    pass


class IdentityViolation(BetheAsepError):
    pass


class InvolutionBroken(BetheAsepError):
    def __init__(self, message, counterexample=None):
        super().__init__(message)
        self.counterexample = counterexample


class PathLost(BetheAsepError):
    pass


class ChainDegenerate(BetheAsepError):
    pass


class ClusterTooLarge(BetheAsepError):
    pass
