"""Exception types shared across the package."""


class SplashwaveError(Exception):
    """Base class for all package errors."""


class ConfigError(SplashwaveError):
    """Malformed run configuration (bad key, bad value, bad line)."""

    def __init__(self, message, line=None):
        self.line = line
        if line is not None:
            message = f"line {line}: {message}"
        super().__init__(message)


class BranchCutError(SplashwaveError):
    """Branch tracking of the conformal map hit a discontinuity."""


class SingularPointError(SplashwaveError):
    """Input coincides with a singular point of the map."""


class QPointProximityError(SingularPointError):
    """Curve passes too close to one of the five singular map points."""


class SingularConfigurationError(SplashwaveError):
    """Boundary integral evaluated on a degenerate (self-touching) curve."""


class TooCloseToCurveError(SplashwaveError):
    """Off-curve velocity target violates the distance precondition."""


class IllConditionedError(SplashwaveError):
    """Linear solve failed to reach the required residual."""


class BlowUpError(SplashwaveError):
    """Time step produced non-finite state values."""

    def __init__(self, message, last_state=None):
        self.last_state = last_state
        super().__init__(message)


class RTConditionError(SplashwaveError):
    """Rayleigh-Taylor sign condition violated; carries the offending minimum."""

    def __init__(self, message, alpha=None, value=None):
        self.alpha = alpha
        self.value = value
        super().__init__(message)


class SurfaceTensionRequiredError(SplashwaveError):
    """Functional undefined at zero surface tension."""
