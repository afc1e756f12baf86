"""Exception hierarchy shared by all lawbench modules."""


class LawbenchError(Exception):
    """Base class for every error raised by this package."""


class DomainError(LawbenchError, ValueError):
    """Input lies outside the domain where a model or formula is defined."""


class ConfigError(LawbenchError, ValueError):
    """Invalid configuration value or unknown option tag."""


class SweepError(LawbenchError, ValueError):
    """Frequency sweep violates its invariants (ordering, finiteness, size)."""


class TouchstoneError(LawbenchError, ValueError):
    """Touchstone parse failure. Carries the 1-based line number when known."""

    def __init__(self, message, line=None):
        self.line = line
        if line is not None:
            message = f"line {line}: {message}"
        super().__init__(message)


class OptionLineError(TouchstoneError):
    pass


class NonMonotoneFrequencyError(TouchstoneError):
    pass


class ColumnCountError(TouchstoneError):
    pass


class UnsupportedParameterError(TouchstoneError):
    pass


class UnsupportedVersionError(TouchstoneError):
    pass


class NoResonance(LawbenchError):
    pass


class NoAntiresonance(LawbenchError):
    pass


class IncompleteBand(LawbenchError):
    pass


class NonConvergence(LawbenchError):
    """Iterative solver gave up. ``best`` holds the best estimate found."""

    def __init__(self, message, best=None, residual=None):
        super().__init__(message)
        self.best = best
        self.residual = residual


class NoRoot(LawbenchError):
    pass


class RankDeficient(LawbenchError, ValueError):
    pass


class GridMismatch(LawbenchError, ValueError):
    pass


class NoCurvature(LawbenchError):
    pass


class AllOutliers(LawbenchError):
    pass
