"""Exception hierarchy shared across the toolkit.

Each class carries the process exit code used when the error escapes to the
command line, so library failures map one-to-one onto script-visible error
classes.
"""


class PipelineError(Exception):
    """Base class for all toolkit errors."""

    exit_code = 1


class InputIOError(PipelineError):
    """A referenced file or directory is missing or unreadable."""

    exit_code = 3


class SchemaError(PipelineError):
    """A file parsed but violates its declared format or an invariant."""

    exit_code = 4


class CalibrationError(PipelineError):
    """Clock alignment could not be established with the required confidence."""

    exit_code = 5


class DegenerateMotionError(PipelineError):
    """Camera baseline too small for the epipolar constraint to carry information."""

    exit_code = 6


class ChannelDeadError(PipelineError):
    """A sensor channel is flatlined or fully excluded."""

    exit_code = 7


class SessionUnusableError(ChannelDeadError):
    """No live channel remains, so no consolidated signal can be formed."""

    exit_code = 7


class ConfigError(PipelineError):
    """Invalid or unknown configuration parameter."""

    exit_code = 8
