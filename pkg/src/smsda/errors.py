"""Exception taxonomy shared across the package."""


class SmsdaError(Exception):
    """Base class for all package-specific failures."""


class NonFiniteError(SmsdaError):
    """NaN or Inf encountered in an input or an intermediate result.

    DNS solvers attach the snapshots computed before blow-up as ``partial``.
    """

    def __init__(self, message, partial=None):
        super().__init__(message)
        self.partial = partial


class SingularSystemError(SmsdaError):
    """Unregularized linear system is singular to working precision."""


class StepFailureError(SmsdaError):
    """Adaptive time step underflowed below the resolvable fraction of the window."""


class DegenerateModulusError(SmsdaError):
    """Modulus observation has |u| ~ 0 at a sensor; its gradient is undefined."""


class ZeroObservationError(SmsdaError):
    """Observation vector has zero norm where a relative criterion is required."""


class RankDeficientJacobianError(SmsdaError):
    """Observation Jacobian is rank deficient; the constrained system has no unique solution."""


class DegenerateLengthScaleError(SmsdaError):
    """Wave-packet length scale collapsed below the supported range."""


class FitFailedError(SmsdaError):
    """No restart of the initial fit reached the requested error."""

    def __init__(self, message, best_error=None, best_params=None):
        super().__init__(message)
        self.best_error = best_error
        self.best_params = best_params


class ZeroReferenceError(SmsdaError):
    """Reference field has zero norm; relative error is undefined."""


class ConfigError(SmsdaError):
    """Experiment configuration violates the preset schema."""
