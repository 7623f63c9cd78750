"""Exception types shared across the package."""


class KbaeError(Exception):
    """Base class for all library errors."""


class ShapeError(KbaeError):
    """Operands have incompatible shapes."""


class ConfigError(KbaeError):
    """A configuration value is invalid or inconsistent."""


class DomainError(KbaeError):
    """A phase matrix carries the wrong domain tag for the operation."""


class RangeError(KbaeError):
    """An index is outside the addressable codebook range."""


class FormatError(KbaeError):
    """A serialized file or bitstream is malformed."""


class NumericError(KbaeError):
    """A computation produced or received non-finite values."""


class StateError(KbaeError):
    """An operation was called in an invalid lifecycle state."""
