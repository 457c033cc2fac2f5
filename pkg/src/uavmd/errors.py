"""Exception taxonomy shared across the package.

Each CLI exit code maps onto one subtree: config errors exit 2, I/O errors 3,
format errors 4, numerical failures 5.
"""


class UavmdError(Exception):
    """Base class for all package-specific errors."""


class ParameterError(UavmdError, ValueError):
    """A function argument violates its documented precondition."""


class ConfigError(UavmdError):
    """Configuration file or override is invalid (unknown key, bad value)."""


class FormatError(UavmdError):
    """A serialized file violates its format contract.

    Carries the byte offset of the first offending byte when known.
    """

    def __init__(self, message, offset=None):
        self.offset = offset
        if offset is not None:
            message = f"{message} (at byte offset {offset})"
        super().__init__(message)


class DetectionError(UavmdError):
    """Target detection failed (e.g. all-zero range-profile matrix)."""


class EstimationError(UavmdError):
    """An estimator found no significant structure (e.g. no periodic flash)."""


class DivergenceError(UavmdError):
    """The iterative solver produced a non-finite intermediate.

    The last finite state is attached so callers can inspect how far the
    iteration got.
    """

    def __init__(self, message, state=None):
        self.state = state
        super().__init__(message)


class UnsupportedModeError(UavmdError):
    """Operation undefined for the requested mode (e.g. Doppler on gapped time)."""
