"""Exception types raised across the package."""


class OssermanLabError(Exception):
    """Base class for all package errors."""


class UnrepresentableIntegral(OssermanLabError):
    """The requested integral leaves the single-term power-log class."""


class ProfileDomainError(OssermanLabError):
    """A numeric profile was evaluated below its declared validity radius."""


class UnsupportedProfile(OssermanLabError):
    """A symbolic-only operation received a numeric profile or nonlinearity."""


class IntegrandError(OssermanLabError):
    """An integrand returned a non-finite value."""


class BracketFailure(OssermanLabError):
    """Inversion of a monotone function could not bracket the target."""


class DerivativeUnavailable(OssermanLabError):
    """A numeric candidate cannot be differentiated at the requested radius."""


class StiffnessAbort(OssermanLabError):
    """The shooting integrator stalled without reaching a blow-up signature.

    The partial solution computed so far is kept on ``partial``.
    """

    def __init__(self, message, partial=None):
        super().__init__(message)
        self.partial = partial


class MonotonicityViolation(OssermanLabError):
    """A radial profile decreased beyond tolerance."""


class ConfigError(OssermanLabError):
    """A scenario configuration could not be parsed or validated."""
