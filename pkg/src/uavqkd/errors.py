"""Exception types shared across the package."""


class ConfigError(ValueError):
    """Invalid configuration: bad key, bad unit, or out-of-range value."""


class NumericError(RuntimeError):
    """A numerical routine (quadrature) failed to reach its tolerance."""

    def __init__(self, message: str, residual: float | None = None):
        super().__init__(message)
        self.residual = residual


class LinearizationWarning(UserWarning):
    """The small-signal linearization behind the analytic detection
    probability is outside its comfortable regime (c_pt * mu_p(0) > 0.1)."""


class CaptureOverflowWarning(UserWarning):
    """A capture-probability approximation exceeded 1 by more than 1e-6."""
