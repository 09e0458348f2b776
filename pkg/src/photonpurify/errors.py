"""Shared exception types for the photonpurify package."""


class PhotonPurifyError(Exception):
    """Base class for all library-specific errors."""


class BasisSizeError(PhotonPurifyError):
    """Requested Fock-space dimension exceeds the configured cap."""


class ConfigurationError(PhotonPurifyError):
    """Invalid parameters, incompatible bases, or malformed config input."""


class TruncationOverflowError(PhotonPurifyError):
    """State has support on occupation sectors the truncation cannot carry
    through the requested transformation."""


class DegenerateOutcomeError(PhotonPurifyError):
    """A detection pattern was conditioned on but has zero probability."""


class FitFailureError(PhotonPurifyError):
    """A least-squares fringe fit failed to converge or was rejected."""


class InsufficientDataError(PhotonPurifyError):
    """Scan does not contain enough data for the requested analysis."""
