"""Exception hierarchy shared by every module of the toolkit."""


class FatouKitError(Exception):
    """Base class for all toolkit errors."""


class RegimeError(FatouKitError, ValueError):
    """Raised when (n, k, p) or another parameter leaves its admissible regime.

    The message names the violated inequality.
    """

    def __init__(self, message, field=None, inequality=None):
        super().__init__(message)
        self.field = field
        self.inequality = inequality


class DegenerateGradientError(FatouKitError, ZeroDivisionError):
    """The gradient of a profile vanishes where a normalized quantity is needed."""


class StepTooLargeError(FatouKitError, ValueError):
    """Finite-difference step too large for the distance to the plane."""


class NonConvergenceError(FatouKitError, RuntimeError):
    """Nonlinear solve failed; carries the residual history."""

    def __init__(self, message, history=None):
        super().__init__(message)
        self.history = list(history or [])


class ResolutionError(FatouKitError, ValueError):
    """A grid is too coarse for the requested scale."""


class NotFoundError(FatouKitError, LookupError):
    """A scan finished without finding a passing parameter."""

    def __init__(self, message, last_scanned=None):
        super().__init__(message)
        self.last_scanned = last_scanned


class ThresholdLogicError(FatouKitError, RuntimeError):
    """Inconsistent stopping-family records inside one level."""


class PlanOverflowError(FatouKitError, OverflowError):
    """A lacunary scale left the supported integer range."""


class DegenerateFitError(FatouKitError, ValueError):
    """Samples do not support a regression (span too small, bad values)."""


class MissingArtifactError(FatouKitError, FileNotFoundError):
    """Report aggregation could not find required run artifacts."""

    def __init__(self, message, missing=None):
        super().__init__(message)
        self.missing = list(missing or [])
