"""Numerical kernels: Butterworth bandpass design, zero-phase filtering,
Hilbert envelope, windowed spectral rate estimation, band-power SNR.

Filtering conventions used throughout the package:

* Stated filter orders are prototype (lowpass) orders. A bandpass of
  prototype order n has true order 2n, and the zero-phase (forward-backward)
  application squares the magnitude response.
* Edge handling is odd reflection padding of 3 x (true order) samples,
  which also sets the minimum signal length.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from scipy import signal as sps

from .core import HrSeries, TimeSeries, sliding_windows
from .errors import InvalidBandError, SignalTooShortError, ValidationError

__all__ = [
    "BandpassSpec",
    "FilterCoefficients",
    "butterworth_bandpass",
    "filtfilt",
    "bandpass",
    "hilbert_envelope",
    "estimate_hr_series",
    "spectral_rate_series",
    "band_snr",
    "HR_BAND_HZ",
]

# default pulse search band, 40-180 bpm
HR_BAND_HZ = (0.66, 3.0)


@dataclass(frozen=True)
class BandpassSpec:
    """Bandpass description: cutoffs in Hz, prototype order."""

    low_cut: float
    high_cut: float
    order: int = 4

    def __post_init__(self):
        if not (0 < self.low_cut < self.high_cut):
            raise InvalidBandError(
                f"need 0 < low < high, got ({self.low_cut}, {self.high_cut})"
            )
        if self.order < 1:
            raise InvalidBandError(f"order must be >= 1, got {self.order}")

    @classmethod
    def per_minute(cls, low_bpm: float, high_bpm: float, order: int = 4) -> "BandpassSpec":
        """Build a spec from cutoffs given in cycles per minute."""
        return cls(low_bpm / 60.0, high_bpm / 60.0, order)


@dataclass(frozen=True)
class FilterCoefficients:
    """Designed digital filter: biquad cascade plus the metadata needed
    to apply it (true order sets the reflection pad length)."""

    sos: np.ndarray
    order: int  # true filter order (2 x prototype order for a bandpass)
    fs: float
    low_cut: float
    high_cut: float


def butterworth_bandpass(spec: BandpassSpec, fs: float) -> FilterCoefficients:
    """Design a digital Butterworth bandpass (analog prototype + bilinear
    transform with frequency prewarping, second-order sections).

    Raises InvalidBandError unless 0 < low < high < fs/2.
    """
    nyq = fs / 2.0
    if not (0 < spec.low_cut < spec.high_cut < nyq):
        raise InvalidBandError(
            f"cutoffs ({spec.low_cut}, {spec.high_cut}) Hz violate Nyquist {nyq} Hz"
        )
    sos = sps.butter(
        spec.order, [spec.low_cut, spec.high_cut], btype="bandpass", fs=fs, output="sos"
    )
    return FilterCoefficients(
        sos=sos, order=2 * spec.order, fs=fs, low_cut=spec.low_cut, high_cut=spec.high_cut
    )


def filtfilt(coeffs: FilterCoefficients, ts: TimeSeries) -> TimeSeries:
    """Apply a filter forward and backward (zero phase, |H|^2 magnitude).

    Uses odd reflection padding of 3 x true filter order samples at each
    end; the signal must be strictly longer than the pad.
    """
    if abs(coeffs.fs - ts.fs) > 1e-9 * max(coeffs.fs, ts.fs):
        raise ValidationError(
            f"filter designed for fs={coeffs.fs}, signal has fs={ts.fs}"
        )
    padlen = 3 * coeffs.order
    if len(ts) <= padlen:
        raise SignalTooShortError(
            f"filtfilt needs more than {padlen} samples, got {len(ts)}"
        )
    y = sps.sosfiltfilt(coeffs.sos, ts.values, padtype="odd", padlen=padlen)
    return TimeSeries(y, ts.fs, ts.t0)


def bandpass(ts: TimeSeries, spec: BandpassSpec) -> TimeSeries:
    """Design-and-apply shorthand: zero-phase Butterworth bandpass."""
    return filtfilt(butterworth_bandpass(spec, ts.fs), ts)


def hilbert_envelope(ts: TimeSeries) -> TimeSeries:
    """Instantaneous amplitude: magnitude of the FFT-based analytic signal."""
    if len(ts) < 16:
        raise SignalTooShortError(f"envelope needs >= 16 samples, got {len(ts)}")
    env = np.abs(sps.hilbert(ts.values))
    return TimeSeries(env, ts.fs, ts.t0)


def _fft_length(fs: float, grid_hz: float, min_len: int) -> int:
    """Smallest power of two giving a spectral grid <= grid_hz."""
    need = max(int(np.ceil(fs / grid_hz)), min_len)
    return 1 << int(np.ceil(np.log2(need)))


def spectral_rate_series(
    ts: TimeSeries,
    window_s: float,
    hop_s: float,
    band_hz: tuple[float, float],
    grid_hz: float = 0.001,
):
    """Windowed spectral-peak rate estimation.

    Hann-windowed, mean-subtracted segments are zero-padded so the FFT bin
    spacing is at most ``grid_hz``; the peak magnitude inside ``band_hz``
    gives the rate. Exact ties resolve to the lowest frequency.

    Returns (centers_s, bpm, dominance, band_fraction) where dominance is
    peak magnitude over median in-band magnitude and band_fraction the share
    of total (DC-excluded) spectral power inside the band.
    """
    lo, hi = band_hz
    if not (0 < lo < hi <= ts.fs / 2):
        raise InvalidBandError(f"band {band_hz} Hz invalid for fs={ts.fs}")
    width = int(round(window_s * ts.fs))
    hop = max(1, int(round(hop_s * ts.fs)))
    if len(ts) < width:
        raise SignalTooShortError(
            f"need {width} samples ({window_s} s at {ts.fs} Hz), got {len(ts)}"
        )
    wins = sliding_windows(len(ts), width, hop)
    nfft = _fft_length(ts.fs, grid_hz, width)
    freqs = np.fft.rfftfreq(nfft, 1.0 / ts.fs)
    in_band = (freqs >= lo) & (freqs <= hi)
    band_idx = np.flatnonzero(in_band)
    taper = np.hanning(width)

    centers = np.empty(len(wins))
    bpm = np.empty(len(wins))
    dominance = np.empty(len(wins))
    band_frac = np.empty(len(wins))
    x = ts.values
    for i, w in enumerate(wins):
        seg = x[w.start : w.stop]
        seg = (seg - seg.mean()) * taper
        mag = np.abs(np.fft.rfft(seg, n=nfft))
        sub = mag[in_band]
        k = int(np.argmax(sub))  # first maximum = lowest frequency on ties
        bpm[i] = 60.0 * freqs[band_idx[k]]
        med = np.median(sub)
        dominance[i] = sub[k] / med if med > 0 else np.inf
        power = mag[1:] ** 2  # DC excluded
        total = power.sum()
        band_frac[i] = power[band_idx[band_idx >= 1] - 1].sum() / total if total > 0 else 0.0
        centers[i] = ts.t0 + w.center() / ts.fs
    return centers, bpm, dominance, band_frac


def estimate_hr_series(
    ts: TimeSeries,
    window_s: float = 10.0,
    hop_s: float = 1.0,
    band_hz: tuple[float, float] = HR_BAND_HZ,
) -> HrSeries:
    """Per-window pulse rate in bpm from the zero-padded magnitude spectrum.

    Defaults follow the usual rPPG evaluation setup: 10 s windows, 1 s hop,
    search band 0.66-3 Hz (40-180 bpm), grid quantization <= 0.001 Hz.
    """
    centers, bpm, dominance, _ = spectral_rate_series(ts, window_s, hop_s, band_hz)
    return HrSeries(centers, bpm, window_s=window_s, hop_s=hop_s, quality=dominance)


def band_snr(ts: TimeSeries, band_hz: tuple[float, float]) -> float:
    """Ratio of in-band to out-of-band spectral power, DC bin excluded."""
    if ts.duration < 10.0:
        raise SignalTooShortError(
            f"band_snr needs >= 10 s of signal, got {ts.duration:.3f} s"
        )
    lo, hi = band_hz
    if not (0 <= lo < hi):
        raise InvalidBandError(f"band {band_hz} out of order")
    freqs = np.fft.rfftfreq(len(ts), 1.0 / ts.fs)
    power = np.abs(np.fft.rfft(ts.values)) ** 2
    power[0] = 0.0
    mask = (freqs >= lo) & (freqs <= hi)
    inside = power[mask].sum()
    outside = power[~mask].sum()
    if outside == 0.0:
        return np.inf
    return float(inside / outside)
