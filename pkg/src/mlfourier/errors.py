"""Exception hierarchy shared by all modules.

Two families exist so that callers (notably the command line front end) can
map failures onto distinct exit codes: :class:`ConfigurationError` for inputs
that violate a documented invariant, :class:`NumericalError` for algorithms
that ran but could not certify their result.
"""

from __future__ import annotations


class ConfigurationError(ValueError):
    """Inputs violate a documented precondition."""


class NonDecaySectorError(ConfigurationError):
    """The ray lies inside the sector where the Mittag-Leffler function grows."""

    def __init__(self, s: float, alpha: float) -> None:
        super().__init__(
            f"ray inside the non-decay sector: |s| = {abs(s):g} <= alpha/2 = {alpha / 2:g}"
        )
        self.s = s
        self.alpha = alpha


class NumericalError(RuntimeError):
    """A numerical procedure failed to reach its accuracy target."""

    def __init__(self, message: str, **diagnostics: object) -> None:
        super().__init__(message)
        self.diagnostics = diagnostics


class SeriesBudgetExceeded(NumericalError):
    pass


class QuadratureStagnation(NumericalError):
    pass


class OscillatorySummationFailed(NumericalError):
    pass


class GridCoverageError(NumericalError):
    """Sampled data does not cover enough of the axis to bound the truncation."""

    def __init__(self, end: str, message: str, **diagnostics: object) -> None:
        super().__init__(f"grid {end}: {message}", end=end, **diagnostics)
        self.end = end


class DomainTooSmall(NumericalError):
    pass


class ContourUnavailable(NumericalError):
    pass


class UnsupportedOrderError(ConfigurationError):
    pass
