"""Blood-volume pulse extraction from RGB traces.

Two classic linear chrominance projections are provided:

* CHROM (de Haan & Jeanne 2013): per window, divide each channel by its
  mean, project X = 3R - 2G and Y = 1.5R + G - 1.5B, combine
  S = X - (sigma_X / sigma_Y) Y, and reassemble with Hann-weighted
  overlap-add at 50% overlap.
* POS (Wang et al. 2017): per stride-1 window, temporally normalize,
  project S1 = G - B and S2 = G + B - 2R, combine
  h = S1 + (sigma_S1 / sigma_S2) S2, subtract the window mean, accumulate.

Both outputs pass through a zero-phase Butterworth bandpass (40-180 bpm,
prototype order 4, by default); the projections themselves leave
high-frequency noise in, POS especially.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .core import TimeSeries
from .dsp import BandpassSpec, bandpass
from .errors import DegenerateWindowError, SignalTooShortError, ValidationError

__all__ = ["RgbTrace", "RppgConfig", "chrom", "pos", "extract"]


@dataclass
class RgbTrace:
    """Per-frame spatially averaged RGB values for one region of interest."""

    r: np.ndarray
    g: np.ndarray
    b: np.ndarray
    fs: float
    t0: float = 0.0

    def __post_init__(self):
        self.r = np.asarray(self.r, dtype=float)
        self.g = np.asarray(self.g, dtype=float)
        self.b = np.asarray(self.b, dtype=float)
        if not (self.r.shape == self.g.shape == self.b.shape) or self.r.ndim != 1:
            raise ValidationError("r, g, b must be equal-length 1-D arrays")
        if self.fs <= 0:
            raise ValidationError(f"fs must be positive, got {self.fs}")

    def __len__(self) -> int:
        return self.r.size


@dataclass(frozen=True)
class RppgConfig:
    method: str = "pos"  # "pos" or "chrom"; used by the pipeline dispatcher
    window_s: float = 1.6
    band: BandpassSpec = field(default_factory=lambda: BandpassSpec.per_minute(40, 180, 4))

    def __post_init__(self):
        if self.method not in ("pos", "chrom"):
            raise ValidationError(f"unknown rPPG method {self.method!r}")
        if self.window_s <= 0:
            raise ValidationError("window_s must be positive")

    def window_frames(self, fs: float) -> int:
        length = int(round(self.window_s * fs))
        if length < 8:
            raise ValidationError(
                f"{self.window_s} s window is only {length} frames at {fs} fps; need >= 8"
            )
        return length


def _check_length(trace: RgbTrace, length: int) -> None:
    if len(trace) < length:
        raise SignalTooShortError(
            f"trace has {len(trace)} frames, below one {length}-frame window"
        )


def chrom(trace: RgbTrace, cfg: RppgConfig = RppgConfig()) -> TimeSeries:
    """CHROM pulse waveform at the trace frame rate, bandpassed per config."""
    length = cfg.window_frames(trace.fs)
    _check_length(trace, length)
    n = len(trace)
    hop = max(1, length // 2)
    starts = list(range(0, n - length + 1, hop))
    if starts[-1] != n - length:
        starts.append(n - length)  # tail window so output covers every frame
    taper = np.hanning(length)
    out = np.zeros(n)
    for s in starts:
        sl = slice(s, s + length)
        means = [trace.r[sl].mean(), trace.g[sl].mean(), trace.b[sl].mean()]
        if any(mu == 0.0 for mu in means):
            raise DegenerateWindowError(f"zero channel mean in window at frame {s}")
        rn = trace.r[sl] / means[0]
        gn = trace.g[sl] / means[1]
        bn = trace.b[sl] / means[2]
        xs = 3.0 * rn - 2.0 * gn
        ys = 1.5 * rn + gn - 1.5 * bn
        sy = ys.std()
        if sy == 0.0:
            raise DegenerateWindowError(f"flat chrominance in window at frame {s}")
        comb = xs - (xs.std() / sy) * ys
        out[sl] += taper * (comb - comb.mean())
    return bandpass(TimeSeries(out, trace.fs, trace.t0), cfg.band)


def pos(trace: RgbTrace, cfg: RppgConfig = RppgConfig()) -> TimeSeries:
    """POS pulse waveform at the trace frame rate, bandpassed per config."""
    length = cfg.window_frames(trace.fs)
    _check_length(trace, length)
    n = len(trace)
    stack = np.stack([trace.r, trace.g, trace.b])
    # all stride-1 windows as (3, n_win, length) views
    wins = np.lib.stride_tricks.sliding_window_view(stack, length, axis=1)
    means = wins.mean(axis=2)
    if np.any(means == 0.0):
        raise DegenerateWindowError("zero channel mean in some window")
    norm = wins / means[:, :, None]
    s1 = norm[1] - norm[2]
    s2 = norm[1] + norm[2] - 2.0 * norm[0]
    sd2 = s2.std(axis=1)
    if np.any(sd2 == 0.0):
        raise DegenerateWindowError("flat projection in some window")
    h = s1 + (s1.std(axis=1) / sd2)[:, None] * s2
    h -= h.mean(axis=1, keepdims=True)
    out = np.zeros(n)
    for j in range(length):  # fixed traversal keeps accumulation deterministic
        out[j : j + h.shape[0]] += h[:, j]
    return bandpass(TimeSeries(out, trace.fs, trace.t0), cfg.band)


def extract(trace: RgbTrace, cfg: RppgConfig = RppgConfig()) -> TimeSeries:
    """Dispatch on cfg.method."""
    return pos(trace, cfg) if cfg.method == "pos" else chrom(trace, cfg)
