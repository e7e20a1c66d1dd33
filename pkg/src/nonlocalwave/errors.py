"""Exception types raised across the package."""


class NonlocalWaveError(Exception):
    """Base class for all package-specific errors."""


class InvalidField(NonlocalWaveError):
    """A grid function contains NaN or Inf samples."""


class NormUndefined(NonlocalWaveError):
    """A weighted norm was requested for a vector outside its domain."""


class FilterValidationError(NonlocalWaveError):
    """A filter fails one of its declared properties."""


class TableauParseError(NonlocalWaveError):
    """A Butcher tableau file is malformed; carries the offending line."""

    def __init__(self, message, line_number=None):
        super().__init__(message)
        self.line_number = line_number


class PoleOfStabilityFunction(NonlocalWaveError):
    """I - zG is singular at the requested point."""


class UnsupportedImplicit(NonlocalWaveError):
    """An implicit tableau was used where only explicit stepping is supported."""


class StageSolveFailed(NonlocalWaveError):
    """Implicit stage equations could not be solved."""


class NoImaginaryAxisStability(NonlocalWaveError):
    """The stability region touches the imaginary axis only at the origin."""


class Diverged(NonlocalWaveError):
    """A time integration blew past the divergence guard.

    Attributes
    ----------
    step : int
        Index of the step at which the guard tripped.
    time : float
        Simulation time at that step.
    ratio : float
        Ratio of the state norm to its initial value when aborted
        (``inf`` if the state went non-finite).
    """

    def __init__(self, message, step, time, ratio):
        super().__init__(message)
        self.step = step
        self.time = time
        self.ratio = ratio


class NonPositiveCoefficient(NonlocalWaveError):
    """A coefficient that must stay positive was sampled at <= 0."""


class FilterRequired(NonlocalWaveError):
    """The requested operation needs a filter with endpoint decay."""


class AliasingGuard(NonlocalWaveError):
    """The grid is too coarse for the requested oscillatory data."""


class InconsistentInitialData(NonlocalWaveError):
    """Requested initial data cannot be represented by the state variables."""


class QuadratureSingular(NonlocalWaveError):
    """Two quadrature nodes collided with a cotangent-kernel pole."""


class GammaSolveFailed(NonlocalWaveError):
    """The vortex-sheet-strength iteration did not converge.

    Attributes
    ----------
    residual : float
        Relative l2 change at the final iteration.
    """

    def __init__(self, message, residual):
        super().__init__(message)
        self.residual = residual


class JacobianDegenerate(NonlocalWaveError):
    """The interface parametrization derivative collapsed to zero."""
