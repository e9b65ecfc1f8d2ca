"""Exception types raised by the switching engine."""


class ArchSwitchError(Exception):
    """Base class for all library errors."""


class ValidationError(ArchSwitchError, ValueError):
    """Invalid input data (nonpositive geometry, shape mismatch, bad grid...)."""


class UnsupportedMode(ValidationError):
    """Mode index without a known buckling eigenvalue."""


class NotBistable(ArchSwitchError):
    """The arch has no interior force peak, so there is no switching point."""


class DegenerateReduction(ArchSwitchError):
    """The load pattern is orthogonal to the soft mode at the fold."""


class NewtonDivergence(ArchSwitchError):
    """Static Newton iteration failed to converge.

    Attributes
    ----------
    iterate : numpy.ndarray
        Last iterate.
    residual : float
        Residual norm at the last iterate.
    """

    def __init__(self, message, iterate=None, residual=float("nan")):
        super().__init__(message)
        self.iterate = iterate
        self.residual = residual


class IntegrationError(ArchSwitchError):
    """Base class for time-integration failures."""


class StepSizeUnderflow(IntegrationError):
    pass


class MaxTimeExceeded(IntegrationError):
    """Integration reached its time limit without the stop condition firing."""


class NoSwitching(IntegrationError):
    """A time series does not contain a switching event."""


class OverflowGuard(ValidationError):
    """Argument outside the range where Airy values are representable/trusted."""
