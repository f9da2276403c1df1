"""Core containers and sample-domain helpers.

Everything downstream works on `TimeSeries` (uniformly sampled, start time +
rate) and on integer sample windows produced by `sliding_windows`. Keeping
these small and dumb makes the numeric modules easy to test in isolation.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from scipy.interpolate import CubicSpline

from .errors import (
    MisalignedSeriesError,
    SignalTooShortError,
    ValidationError,
    WidthExceedsLengthError,
    ZeroVarianceError,
)

__all__ = [
    "TimeSeries",
    "HrSeries",
    "LagSeries",
    "ChannelSet",
    "Window",
    "sliding_windows",
    "znormalize",
    "resample",
    "align_pair",
]


@dataclass
class TimeSeries:
    """Uniformly sampled scalar signal.

    Attributes
    ----------
    values : np.ndarray
        1-D float samples.
    fs : float
        Sampling rate in Hz, > 0.
    t0 : float
        Time of the first sample in seconds.
    """

    values: np.ndarray
    fs: float
    t0: float = 0.0

    def __post_init__(self):
        self.values = np.asarray(self.values, dtype=float)
        if self.values.ndim != 1:
            raise ValidationError("TimeSeries values must be 1-D")
        if not np.isfinite(self.fs) or self.fs <= 0:
            raise ValidationError(f"sampling rate must be positive, got {self.fs}")

    def __len__(self) -> int:
        return self.values.size

    @property
    def duration(self) -> float:
        """Covered time in seconds, counting each sample as one period."""
        return len(self) / self.fs

    @property
    def span(self) -> float:
        """Time from first to last sample."""
        return max(len(self) - 1, 0) / self.fs

    def times(self) -> np.ndarray:
        return self.t0 + np.arange(len(self)) / self.fs

    def copy(self) -> "TimeSeries":
        return TimeSeries(self.values.copy(), self.fs, self.t0)


@dataclass
class HrSeries:
    """Windowed rate estimates: window-center times and beats (or breaths)
    per minute, with the analysis window/hop recorded and an optional
    per-window quality score (spectral peak dominance)."""

    t: np.ndarray
    bpm: np.ndarray
    window_s: float = float("nan")
    hop_s: float = float("nan")
    quality: np.ndarray | None = None

    def __post_init__(self):
        self.t = np.asarray(self.t, dtype=float)
        self.bpm = np.asarray(self.bpm, dtype=float)
        if self.t.shape != self.bpm.shape:
            raise ValidationError("t and bpm must have the same shape")
        if self.quality is not None:
            self.quality = np.asarray(self.quality, dtype=float)
            if self.quality.shape != self.t.shape:
                raise ValidationError("quality must match t in shape")

    def __len__(self) -> int:
        return self.t.size


@dataclass
class LagSeries:
    """Windowed lag estimates: center time (s), lag (ms), and peak correlation."""

    t: np.ndarray
    lag_ms: np.ndarray
    peak_r: np.ndarray

    def __post_init__(self):
        self.t = np.asarray(self.t, dtype=float)
        self.lag_ms = np.asarray(self.lag_ms, dtype=float)
        self.peak_r = np.asarray(self.peak_r, dtype=float)
        if not (self.t.shape == self.lag_ms.shape == self.peak_r.shape):
            raise ValidationError("t, lag_ms and peak_r must share a shape")

    def __len__(self) -> int:
        return self.t.size


@dataclass
class ChannelSet:
    """Named collection of signals, e.g. the contact sensor sites.

    Channels may have differing rates in general; operations that need a
    shared clock call :meth:`common_fs`, which also checks equal length
    and start time.
    """

    channels: dict[str, TimeSeries]

    def __post_init__(self):
        if not self.channels:
            raise ValidationError("ChannelSet needs at least one channel")

    def __len__(self) -> int:
        return len(self.channels)

    def __getitem__(self, name: str) -> TimeSeries:
        return self.channels[name]

    def names(self) -> list[str]:
        """Site names in sorted order (the canonical processing order)."""
        return sorted(self.channels)

    def common_fs(self) -> float:
        """Shared sampling rate; channels must also agree on length and t0."""
        series = [self.channels[k] for k in self.names()]
        fs = series[0].fs
        n = len(series[0])
        t0 = series[0].t0
        for s in series[1:]:
            if abs(s.fs - fs) > 1e-9 * fs or len(s) != n or abs(s.t0 - t0) > 1e-9:
                raise MisalignedSeriesError(
                    "channels differ in rate, length or start time"
                )
        return fs


@dataclass(frozen=True)
class Window:
    """Half-open sample range [start, start + length)."""

    start: int
    length: int

    @property
    def stop(self) -> int:
        return self.start + self.length

    def center(self) -> int:
        """Integer center index, start + length // 2."""
        return self.start + self.length // 2


def sliding_windows(n: int, width: int, stride: int) -> list[Window]:
    """Enumerate fully contained windows over ``n`` samples.

    Returns windows starting at 0, stride, 2*stride, ... while start + width <= n.
    Count is floor((n - width) / stride) + 1.
    """
    if width < 1 or stride < 1:
        raise ValidationError(f"width and stride must be >= 1, got {width}, {stride}")
    if width > n:
        raise WidthExceedsLengthError(f"window width {width} exceeds signal length {n}")
    starts = range(0, n - width + 1, stride)
    return [Window(s, width) for s in starts]


def znormalize(x: np.ndarray, ddof: int = 0) -> np.ndarray:
    """Subtract the mean and divide by the standard deviation.

    Population sigma by default (ddof=0). Constant input has no scale and
    raises ZeroVarianceError rather than returning NaNs.
    """
    x = np.asarray(x, dtype=float)
    mu = x.mean()
    sd = x.std(ddof=ddof)
    # a constant at large magnitude rounds to sd ~ ulp(|x|), not exactly 0
    if not np.isfinite(sd) or sd <= 1e-12 * np.max(np.abs(x), initial=0.0):
        raise ZeroVarianceError("cannot z-normalize a constant signal")
    return (x - mu) / sd


def resample(ts: TimeSeries, new_fs: float, kind: str = "linear") -> TimeSeries:
    """Resample onto a uniform grid at ``new_fs`` starting at the same t0.

    Output has floor(span * new_fs) + 1 samples so it never extrapolates past
    the last input sample. ``kind`` is "linear" (np.interp) or "cubic"
    (natural cubic spline).
    """
    if not np.isfinite(new_fs) or new_fs <= 0:
        raise ValidationError(f"target rate must be positive, got {new_fs}")
    if len(ts) < 2:
        raise SignalTooShortError("resampling needs at least 2 samples")
    if kind not in ("linear", "cubic"):
        raise ValidationError(f"unknown interpolation kind {kind!r}")
    if new_fs == ts.fs:
        return ts.copy()
    # tiny fuzz so span*new_fs landing a hair under an integer still counts it
    n_out = int(np.floor(ts.span * new_fs + 1e-9)) + 1
    rel_out = np.arange(n_out) / new_fs
    rel_in = np.arange(len(ts)) / ts.fs
    if kind == "linear":
        vals = np.interp(rel_out, rel_in, ts.values)
    else:
        vals = CubicSpline(rel_in, ts.values)(rel_out)
    return TimeSeries(vals, new_fs, ts.t0)


def align_pair(a: TimeSeries, b: TimeSeries, rel_tol: float = 1e-6):
    """Clip two same-rate series to their overlapping region.

    The start-time difference must be an integer number of samples (within
    ``rel_tol`` of a sample period). Returns (a_vals, b_vals, fs, t0) for the
    overlap. Raises MisalignedSeriesError when rates differ, the offset falls
    between samples, or there is no overlap.
    """
    if abs(a.fs - b.fs) > rel_tol * max(a.fs, b.fs):
        raise MisalignedSeriesError(f"sampling rates differ: {a.fs} vs {b.fs}")
    fs = a.fs
    off = (b.t0 - a.t0) * fs
    off_i = int(round(off))
    if abs(off - off_i) > 1e-3:
        raise MisalignedSeriesError(
            f"start-time offset {b.t0 - a.t0:g} s is not a whole number of samples"
        )
    # overlap in a's sample indices
    lo = max(0, off_i)
    hi = min(len(a), off_i + len(b))
    if hi <= lo:
        raise MisalignedSeriesError("series do not overlap in time")
    av = a.values[lo:hi]
    bv = b.values[lo - off_i : hi - off_i]
    return av, bv, fs, a.t0 + lo / fs
