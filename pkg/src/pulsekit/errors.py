"""Exception types shared across the toolkit.

Two broad families matter for the command-line wrapper: `ValidationError`
covers malformed inputs (manifests, files, argument contracts) and maps to
exit code 2, while everything else derived from `ToolkitError` signals a
numerical or data-quality failure discovered mid-computation (exit code 3).
"""

from __future__ import annotations


class ToolkitError(Exception):
    """Base class for all errors raised by this package."""


class ValidationError(ToolkitError):
    """Malformed input: bad manifest, unreadable file, broken argument contract."""


class SignalTooShortError(ValidationError):
    """Signal shorter than an operation's minimum length."""


class WidthExceedsLengthError(ValidationError):
    """Requested window width exceeds the available signal length."""


class InvalidBandError(ValidationError):
    """Band edges out of order or outside the representable range (0, fs/2)."""


class MisalignedSeriesError(ValidationError):
    """Two series cannot be compared: incompatible rates or no overlap."""


class FrameSizeMismatchError(ValidationError):
    """Frames in a sequence do not share a common raster size."""


class SampleTooSmallError(ValidationError):
    """Too few observations for the requested statistical test."""


class InsufficientDataError(ValidationError):
    """Not enough groups or paired observations."""


class ZeroVarianceError(ToolkitError):
    """A quantity that must have spread is constant."""


class DegenerateWindowError(ZeroVarianceError):
    """A processing window is constant where variation is required."""


class AllTiedError(ZeroVarianceError):
    """Every observation is identical; the test statistic is undefined."""


class AllChannelsDeadError(ToolkitError):
    """No channel carries signal in some fusion window."""


class GuideGapError(ToolkitError):
    """Reference rate unavailable over part of the requested span."""


class AllRejectedError(ToolkitError):
    """Quality gating rejected every analysis window."""
