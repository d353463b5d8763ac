"""Exception types shared across the toolkit.

Everything derives from ValueError so generic callers can keep catching
ValueError, while the CLI/service can map specific failures to exit codes
and HTTP status codes.
"""


class OtalinkError(ValueError):
    """Base class for all toolkit errors."""


class ShapeError(OtalinkError):
    """Input dimensions or lengths are inconsistent."""


class CapacityError(OtalinkError):
    """Payload does not fit (or is empty for) the resource layout."""


class InfeasibleTargetError(OtalinkError):
    """Requested SINR target cannot be reached by scaling interference."""


class UndefinedSinrError(OtalinkError):
    """SINR is undefined (zero signal power or zero interference-plus-noise)."""


class InsufficientDataError(OtalinkError):
    """Not enough samples/points for the requested statistic or fit."""


class DegenerateChannelError(OtalinkError):
    """Channel gain is zero; combining/decoding is impossible."""


class EstimationError(OtalinkError):
    """Pilot system is singular; channel estimation is impossible."""


class SchemaError(OtalinkError):
    """CSV/config content does not match the expected schema."""
