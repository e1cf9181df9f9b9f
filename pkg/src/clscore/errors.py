"""Exception types raised by clscore."""


class ClscoreError(Exception):
    """Base class for structural errors (nonzero CLI exit)."""


class DimensionMismatch(ClscoreError, ValueError):
    pass


class ZeroVarianceRow(ClscoreError, ValueError):
    pass


class NotClosedUnderInclusion(ClscoreError, ValueError):
    pass


class DuplicateSimplex(ClscoreError, ValueError):
    pass


class MalformedDocument(ClscoreError, ValueError):
    pass


class NoSimplicesAtDimension(ClscoreError, ValueError):
    pass


class MissingWeights(ClscoreError, ValueError):
    pass


class ZeroVarianceFeature(ClscoreError, ValueError):
    """Centered feature has (numerically) zero norm; its score is 0/0."""


class ConvergenceFailure(ClscoreError, RuntimeError):
    def __init__(self, message, residuals=None):
        super().__init__(message)
        self.residuals = residuals


class MissingTupleValue(ClscoreError, KeyError):
    pass


class InvalidPValue(ClscoreError, ValueError):
    pass


class ParseError(ClscoreError, ValueError):
    """Input file could not be parsed; message carries path and line."""
