"""Exception hierarchy shared by all modules."""


class FourierInterpError(Exception):
    """Base class. ``exit_code`` is used by the command-line front end."""

    exit_code = 3


class ConfigError(FourierInterpError, ValueError):
    exit_code = 2


class NonConvergence(FourierInterpError):
    pass


class BranchTrackingFailure(FourierInterpError):
    pass


class IterationLimit(FourierInterpError):
    pass


class PoleProximity(FourierInterpError):
    pass


class AccuracyNotReached(FourierInterpError):
    pass


class AliasingSuspected(FourierInterpError):
    pass


class GridMismatch(FourierInterpError, ValueError):
    exit_code = 2


class GridTooShort(FourierInterpError):
    pass


class TailNotNegligible(FourierInterpError):
    pass


class OscillationBudgetExceeded(FourierInterpError):
    pass


class TableRangeExceeded(FourierInterpError):
    pass


class GridCoverage(FourierInterpError):
    pass


class NotContracting(FourierInterpError):
    pass


class Stagnation(FourierInterpError):
    pass


class QuadratureDegreeInsufficient(FourierInterpError):
    pass


class ParityViolation(FourierInterpError):
    pass


class TotalIntegralNonzero(FourierInterpError):
    pass


class BudgetExceeded(FourierInterpError):
    pass


class TruncationBudget(FourierInterpError):
    pass
