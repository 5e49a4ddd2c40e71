"""Exception and warning types shared across the package."""


class PrivBoostError(ValueError):
    """Base class for all domain errors raised by this package."""


class LengthMismatchError(PrivBoostError):
    """Two vectors that must share a length do not."""


class DimensionMismatchError(PrivBoostError):
    """A point or sample does not match the hypothesis dimension."""


class ZeroMeasureError(PrivBoostError):
    """A measure with zero total mass cannot be normalized."""


class TooDenseError(PrivBoostError):
    """Input mass exceeds kappa * n, so capped scaling does not apply."""


class AllZeroError(PrivBoostError):
    """No scaling constant can reach the target density."""


class TooLargeError(PrivBoostError):
    """Brute-force search is only supported for very small n."""


class NegativeRhoError(PrivBoostError):
    """zCDP parameters must be nonnegative."""


class BadDeltaError(PrivBoostError):
    """delta must lie strictly between 0 and 1."""


class BadSigmaError(PrivBoostError):
    """Gaussian noise scale is outside its valid range."""


class BadTargetError(PrivBoostError):
    """Privacy target is not a usable (epsilon, delta) pair."""


class BadParamsError(PrivBoostError):
    """A parameter is outside the range the formula is defined on."""


class BadLossError(PrivBoostError):
    """Loss entries must lie in [0, 1]."""


class ComparatorNotDenseError(PrivBoostError):
    """Regret comparators must have density at least kappa."""


class BadConfigError(PrivBoostError):
    """An experiment or generator configuration is invalid."""


class WeakLearnerFailureError(PrivBoostError):
    """The weak learner raised during boosting; carries the round index."""

    def __init__(self, round_index: int, message: str = ""):
        self.round_index = round_index
        super().__init__(f"weak learner failed at round {round_index}: {message}")


class ParseError(PrivBoostError):
    """A dataset file could not be parsed; carries line and column."""

    def __init__(self, message: str, line: int, column: int | None = None):
        self.line = line
        self.column = column
        where = f"line {line}" if column is None else f"line {line}, column {column}"
        super().__init__(f"{message} ({where})")


class NormViolationError(PrivBoostError):
    """An example lies outside the unit ball beyond tolerance."""


class SampleTooSmallWarning(UserWarning):
    """Advisory: the sample is likely too small for the requested accuracy."""
