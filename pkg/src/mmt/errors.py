"""Exception taxonomy shared across the package."""


class MmtError(Exception):
    """Base class for all package-specific failures."""


class SingularMatrixError(MmtError):
    """Linear solve hit a pivot below the singularity threshold."""


class SingularMetricError(MmtError):
    """Metric tensor is numerically singular at the queried point."""


class DegenerateFrameError(MmtError):
    """Gram-Schmidt frame construction broke down (wrong sign or tiny norm)."""


class UnsupportedMetricError(MmtError):
    """Operation needs metric features (analytic frame field) this metric lacks."""


class IntegrationAbortedError(MmtError):
    """Curve integration stopped early; carries the last good state."""

    def __init__(self, message, last_state=None, tau=None):
        super().__init__(message)
        self.last_state = last_state
        self.tau = tau


class InvalidAccelerationError(MmtError):
    """Acceleration field is not orthogonal to the curve velocity."""


class DivergedError(MmtError):
    """Transfer integration produced non-finite entries."""

    def __init__(self, message, tau=None):
        super().__init__(message)
        self.tau = tau


class ConfigError(MmtError):
    """Scenario configuration is malformed; carries a line number when known."""

    def __init__(self, message, line=None):
        if line is not None:
            message = f"line {line}: {message}"
        super().__init__(message)
        self.line = line
