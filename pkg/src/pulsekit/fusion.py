"""Fuse several noisy contact-PPG channels into one clean pulse waveform.

The recipe, applied over a sliding window (10 s, stride 1 sample by
default): z-normalize each channel segment, bandpass it around the guide
rate at the window center (+/- delta_bpm), sum the channels, and emit the
window's center sample. The assembled waveform is finally divided by its
Hilbert envelope, giving an approximately unit-amplitude oscillation.

Filtering every stride-1 window separately would cost O(N * W) filter runs
per band. But the emitted value is a fixed linear functional of the window:
pad, zero-phase filter, and take-the-center compose into one kernel row per
band, so center = (row . window - mu_w * sum(row)) / sigma_w. The row is
extracted once per band by filtering an identity matrix (exact, including
the reflection padding) and applied to all windows at once by FFT
correlation; results match the literal per-window loop to float roundoff.
Guide rates are quantized (1 bpm default) so only a handful of distinct
bands are ever designed. Kernel extraction costs O(W^2) per distinct band,
fine for windows up to a few thousand samples.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from scipy import signal as sps

from .core import ChannelSet, HrSeries, TimeSeries
from .dsp import BandpassSpec, butterworth_bandpass, estimate_hr_series
from .errors import (
    AllChannelsDeadError,
    GuideGapError,
    InvalidBandError,
    ValidationError,
    WidthExceedsLengthError,
    ZeroVarianceError,
)

__all__ = ["GuideRate", "FusionConfig", "fuse", "fused_hr"]

# below this fraction of window RMS a channel window counts as dead
DEAD_SIGMA_REL = 1e-7


@dataclass
class GuideRate:
    """Reference pulse-rate profile (e.g. a fingertip oximeter's output)."""

    t: np.ndarray
    bpm: np.ndarray

    def __post_init__(self):
        self.t = np.asarray(self.t, dtype=float)
        self.bpm = np.asarray(self.bpm, dtype=float)
        if self.t.shape != self.bpm.shape or self.t.ndim != 1 or self.t.size == 0:
            raise ValidationError("guide needs matching non-empty t and bpm arrays")
        if np.any(np.diff(self.t) <= 0):
            raise ValidationError("guide times must be strictly increasing")
        if np.any((self.bpm < 30.0) | (self.bpm > 220.0)):
            raise ValidationError("guide rates outside the plausible 30-220 bpm range")

    def at(self, t: np.ndarray) -> np.ndarray:
        """Nearest-sample lookup; raises GuideGapError outside coverage."""
        t = np.asarray(t, dtype=float)
        slack = 0.5 * float(np.median(np.diff(self.t))) if self.t.size > 1 else 0.0
        if t.min() < self.t[0] - slack or t.max() > self.t[-1] + slack:
            raise GuideGapError(
                f"guide covers [{self.t[0]:.3f}, {self.t[-1]:.3f}] s but "
                f"[{t.min():.3f}, {t.max():.3f}] s was requested"
            )
        idx = np.searchsorted(self.t, t)
        idx = np.clip(idx, 1, self.t.size - 1)
        left = self.t[idx - 1]
        right = self.t[idx]
        idx -= (t - left) < (right - t)
        return self.bpm[idx]


@dataclass(frozen=True)
class FusionConfig:
    window_s: float = 10.0
    stride: int = 1
    delta_bpm: float = 30.0
    filter_order: int = 2
    envelope_epsilon: float = 1e-6  # relative to max |combined|
    quantum_bpm: float = 1.0  # guide-rate quantization for the filter bank

    def __post_init__(self):
        if self.window_s <= 0 or self.stride < 1:
            raise ValidationError("window_s must be > 0 and stride >= 1")
        if self.delta_bpm <= 0 or self.envelope_epsilon <= 0 or self.quantum_bpm <= 0:
            raise ValidationError("delta_bpm, envelope_epsilon, quantum_bpm must be > 0")
        if self.filter_order < 1:
            raise ValidationError("filter_order must be >= 1")


def _moving_stats(x: np.ndarray, width: int, starts: np.ndarray):
    """Window mean and population sigma of centered x at the given starts."""
    c1 = np.concatenate(([0.0], np.cumsum(x)))
    c2 = np.concatenate(([0.0], np.cumsum(x * x)))
    s1 = c1[starts + width] - c1[starts]
    s2 = c2[starts + width] - c2[starts]
    mu = s1 / width
    var = np.maximum(s2 / width - mu * mu, 0.0)
    rms = np.sqrt(s2 / width)
    return mu, np.sqrt(var), rms


_KERNEL_CACHE: dict = {}
_KERNEL_CACHE_MAX = 32


def _center_kernel(band: BandpassSpec, fs: float, width: int) -> np.ndarray:
    """Kernel row reproducing the center sample of a zero-phase bandpass.

    Padding a window, filtering forward-backward, and reading the center
    sample compose into one linear functional of the window, i.e. a dot
    product with a fixed (width,) row. The row is recovered exactly by
    pushing identity columns through the filter, and cached since guide
    quantization keeps the number of distinct bands small.
    """
    key = (band.low_cut, band.high_cut, band.order, fs, width)
    cached = _KERNEL_CACHE.get(key)
    if cached is not None:
        return cached
    coeffs = butterworth_bandpass(band, fs)
    padlen = 3 * coeffs.order
    center = width // 2
    row = np.empty(width)
    step = 1024
    for j in range(0, width, step):
        cols = min(step, width - j)
        eye = np.zeros((width, cols))
        eye[j + np.arange(cols), np.arange(cols)] = 1.0
        out = sps.sosfiltfilt(coeffs.sos, eye, axis=0, padtype="odd", padlen=padlen)
        row[j : j + cols] = out[center]
    if len(_KERNEL_CACHE) >= _KERNEL_CACHE_MAX:
        _KERNEL_CACHE.pop(next(iter(_KERNEL_CACHE)))
    _KERNEL_CACHE[key] = row
    return row


def fuse(channels: ChannelSet, guide: GuideRate, cfg: FusionConfig = FusionConfig()) -> TimeSeries:
    """Combine channels into a unit-amplitude consensus pulse waveform.

    Output covers the window centers: length (n - W)//stride + 1 at rate
    fs/stride, starting W//2 samples after the input. Channels whose window
    variance vanishes are excluded from that window's sum; if every channel
    is dead in some window, AllChannelsDeadError is raised.
    """
    fs = channels.common_fs()
    names = channels.names()
    first = channels[names[0]]
    n = len(first)
    t0 = first.t0

    width = int(round(cfg.window_s * fs))
    if width > n:
        raise WidthExceedsLengthError(
            f"fusion window of {width} samples exceeds record length {n}"
        )
    if width <= 12 * cfg.filter_order:
        raise ValidationError(
            f"window of {width} samples cannot settle an order-{cfg.filter_order} bandpass"
        )
    starts = np.arange(0, n - width + 1, cfg.stride)
    centers = starts + width // 2
    t_centers = t0 + centers / fs

    rate = guide.at(t_centers)
    quant = np.round(rate / cfg.quantum_bpm) * cfg.quantum_bpm
    low = np.maximum((quant - cfg.delta_bpm) / 60.0, 0.1)
    high = np.minimum((quant + cfg.delta_bpm) / 60.0, 0.99 * fs / 2.0)
    if np.any(low >= high):
        raise InvalidBandError("guide band collapsed after Nyquist clamping")

    # per-channel window statistics (on mean-removed samples for stability)
    data = np.empty((len(names), n))
    mu = np.empty((len(names), starts.size))
    sigma = np.empty_like(mu)
    dead = np.empty(mu.shape, dtype=bool)
    for ci, name in enumerate(names):
        x = channels[name].values - channels[name].values.mean()
        data[ci] = x
        m, s, rms = _moving_stats(x, width, starts)
        mu[ci] = m
        sigma[ci] = s
        dead[ci] = s <= DEAD_SIGMA_REL * rms
    all_dead = dead.all(axis=0)
    if all_dead.any():
        k = int(np.argmax(all_dead))
        raise AllChannelsDeadError(
            f"every channel is flat in the window centered at t={t_centers[k]:.3f} s"
        )

    combined = np.zeros(starts.size)
    for lo, hi in sorted(set(zip(low, high))):
        sel = np.flatnonzero((low == lo) & (high == hi))
        row = _center_kernel(BandpassSpec(lo, hi, cfg.filter_order), fs, width)
        row_rev = row[::-1]
        gain = row.sum()  # response to the all-ones window
        total = np.zeros(sel.size)
        for ci in range(len(names)):
            scores = sps.fftconvolve(data[ci], row_rev, mode="valid")
            val = (scores[starts[sel]] - mu[ci, sel] * gain) / np.where(
                dead[ci, sel], 1.0, sigma[ci, sel]
            )
            total += np.where(dead[ci, sel], 0.0, val)
        combined[sel] = total

    peak = np.max(np.abs(combined))
    if peak == 0.0:
        raise ZeroVarianceError("fused waveform is identically zero")
    env = np.abs(sps.hilbert(combined))
    out = combined / np.maximum(env, cfg.envelope_epsilon * peak)
    return TimeSeries(out, fs / cfg.stride, t0 + (width // 2) / fs)


def fused_hr(
    channels: ChannelSet,
    guide: GuideRate,
    cfg: FusionConfig = FusionConfig(),
    hr_window_s: float = 10.0,
    hr_hop_s: float = 1.0,
) -> HrSeries:
    """Pulse-rate series of the fused waveform."""
    return estimate_hr_series(fuse(channels, guide, cfg), hr_window_s, hr_hop_s)
