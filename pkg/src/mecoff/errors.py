"""Exception types shared across the package."""


class MecoffError(Exception):
    """Base class for all package errors."""


class ConfigError(MecoffError):
    """Configuration file is unparseable, has unknown keys, or out-of-range values."""


class GeometryError(MecoffError):
    """Degenerate geometry (e.g. coincident transmitter and receiver)."""


class ChannelError(MecoffError):
    """Degenerate channel state (non-positive gain denominator, no MEC to associate)."""


class ActionError(MecoffError):
    """Action outside the discretization grid or empty action set."""


class ShapeError(MecoffError):
    """Tensor shape does not match the network specification."""


class BatchError(MecoffError):
    """Empty or otherwise unusable training batch."""
