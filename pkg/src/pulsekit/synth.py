"""Synthetic multi-site subject generator.

Produces contact-PPG channels with per-site transit delays, a guide rate
with bounded jitter, RGB skin traces (optionally with an adversarial
flicker), chest-motion matrices, and rendered frame sequences, all from one
seeded specification. Philox counter-based streams keep every artifact
bit-reproducible and independent per channel, whatever the generation or
thread order.

The pulse template is a three-harmonic sum (relative amplitudes 1/0.4/0.2
by default) so cross-correlation peaks are realistically sharp. Respiration
enters the contact channels twice: as amplitude modulation of the pulse and
as a small additive baseline component (the part a respiration-band filter
can actually see).
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np
from scipy.integrate import cumulative_trapezoid

from .core import ChannelSet, HrSeries, TimeSeries, sliding_windows
from .errors import ValidationError
from .fusion import GuideRate
from .respiration import MOTION_CELLS, MotionMatrix
from .rppg import RgbTrace

__all__ = [
    "RateProfile",
    "NoiseSpec",
    "SiteSpec",
    "SubjectSpec",
    "AttackSpec",
    "HEMOGLOBIN_RGB",
    "gen_contact_channels",
    "gen_rgb_trace",
    "gen_motion_matrix",
    "gen_frame_sequence",
    "truth_rate_series",
]

# relative pulsatile strength of the three color channels in skin
HEMOGLOBIN_RGB = (0.33, 0.77, 0.53)

# Philox substream ids; site streams start at _STREAM_SITES + site index
_STREAM_GUIDE = 0
_STREAM_SITES = 1
_STREAM_TRACE = 1000
_STREAM_MOTION = 2000


@dataclass(frozen=True)
class RateProfile:
    """Rate-versus-time profile in cycles per minute.

    Modes: "constant" (start_bpm), "chirp" (linear start_bpm -> end_bpm over
    the record), "piecewise" (linear interpolation through knots).
    """

    mode: str = "constant"
    start_bpm: float = 72.0
    end_bpm: float = 72.0
    knots_t: tuple = ()
    knots_bpm: tuple = ()

    def __post_init__(self):
        if self.mode not in ("constant", "chirp", "piecewise"):
            raise ValidationError(f"unknown rate profile mode {self.mode!r}")
        if self.mode == "piecewise" and len(self.knots_t) != len(self.knots_bpm):
            raise ValidationError("piecewise profile needs matching knot arrays")
        if self.mode == "piecewise" and len(self.knots_t) < 2:
            raise ValidationError("piecewise profile needs >= 2 knots")

    def at(self, t: np.ndarray, duration: float) -> np.ndarray:
        t = np.asarray(t, dtype=float)
        if self.mode == "constant":
            return np.full(t.shape, self.start_bpm)
        if self.mode == "chirp":
            frac = np.clip(t / duration, 0.0, 1.0)
            return self.start_bpm + (self.end_bpm - self.start_bpm) * frac
        return np.interp(t, np.asarray(self.knots_t), np.asarray(self.knots_bpm))


@dataclass(frozen=True)
class NoiseSpec:
    white_sigma: float = 0.0
    burst_start_s: float | None = None
    burst_duration_s: float = 0.0
    burst_sigma: float = 0.0
    wander_sigma: float = 0.0
    wander_cutoff_hz: float = 0.08  # baseline wander lives below 0.1 Hz


@dataclass(frozen=True)
class SiteSpec:
    name: str
    transit_ms: float = 0.0
    noise: NoiseSpec = field(default_factory=NoiseSpec)

    def __post_init__(self):
        if not (0.0 <= self.transit_ms <= 200.0):
            raise ValidationError(
                f"transit must lie in [0, 200] ms, got {self.transit_ms}"
            )


@dataclass(frozen=True)
class SubjectSpec:
    duration_s: float = 60.0
    fs_contact: float = 400.0
    fs_video: float = 30.0
    fs_guide: float = 60.0
    hr: RateProfile = field(default_factory=RateProfile)
    resp: RateProfile = field(default_factory=lambda: RateProfile(start_bpm=15.0))
    sites: tuple[SiteSpec, ...] = (SiteSpec("face"),)
    seed: int = 0
    harmonic_amps: tuple[float, ...] = (1.0, 0.4, 0.2)
    am_depth: float = 0.3
    resp_baseline: float = 0.3
    guide_jitter_bpm: float = 1.0

    def __post_init__(self):
        if self.duration_s <= 0:
            raise ValidationError("duration must be positive")
        names = [s.name for s in self.sites]
        if len(set(names)) != len(names):
            raise ValidationError("site names must be unique")


@dataclass(frozen=True)
class AttackSpec:
    """Anti-phase R/G flicker with linearly ramping amplitude."""

    freq_bpm: float = 120.0
    onset_s: float = 0.0
    duration_s: float = 0.0
    amplitude: float = 0.0  # peak relative modulation depth at full ramp

    def __post_init__(self):
        if not (40.0 <= self.freq_bpm <= 180.0):
            raise ValidationError("attack frequency must sit in the 40-180 bpm band")

    def ramp(self, t: np.ndarray) -> np.ndarray:
        if self.duration_s <= 0:
            return np.zeros_like(t)
        frac = (t - self.onset_s) / self.duration_s
        frac = np.where((frac >= 0) & (frac <= 1), frac, 0.0)
        return self.amplitude * frac


def _rng(spec: SubjectSpec, stream: int) -> np.random.Generator:
    return np.random.Generator(np.random.Philox(spec.seed).jumped(stream))


def _grid(duration: float, fs: float) -> np.ndarray:
    return np.arange(int(round(duration * fs))) / fs


def _phase(profile: RateProfile, t: np.ndarray, duration: float) -> np.ndarray:
    """Accumulated phase 2*pi * integral(rate)/60."""
    rate = profile.at(t, duration)
    return 2.0 * np.pi * cumulative_trapezoid(rate / 60.0, t, initial=0.0)


def _pulse(spec: SubjectSpec, t: np.ndarray, transit_ms: float = 0.0) -> np.ndarray:
    """Pulse template evaluated at t - transit (phase interpolation)."""
    phi = _phase(spec.hr, t, spec.duration_s)
    phi_d = np.interp(t - transit_ms / 1000.0, t, phi)
    wave = np.zeros_like(t)
    for k, amp in enumerate(spec.harmonic_amps, start=1):
        if amp:
            wave += amp * np.sin(k * phi_d)
    return wave


def _resp_wave(spec: SubjectSpec, t: np.ndarray) -> np.ndarray:
    return np.sin(_phase(spec.resp, t, spec.duration_s))


def _lowpass_noise(rng: np.random.Generator, n: int, fs: float, cutoff: float, sigma: float):
    from scipy import signal as sps

    white = rng.standard_normal(n)
    sos = sps.butter(2, cutoff, btype="lowpass", fs=fs, output="sos")
    slow = sps.sosfiltfilt(sos, white)
    sd = slow.std()
    return slow * (sigma / sd) if sd > 0 else np.zeros(n)


def _site_noise(spec: SubjectSpec, site: SiteSpec, t: np.ndarray, stream: int) -> np.ndarray:
    ns = site.noise
    rng = _rng(spec, stream)
    out = np.zeros_like(t)
    if ns.white_sigma > 0:
        out += rng.normal(0.0, ns.white_sigma, t.size)
    if ns.burst_start_s is not None and ns.burst_sigma > 0 and ns.burst_duration_s > 0:
        mask = (t >= ns.burst_start_s) & (t < ns.burst_start_s + ns.burst_duration_s)
        burst = rng.normal(0.0, ns.burst_sigma, int(mask.sum()))
        out[mask] += burst
    if ns.wander_sigma > 0:
        out += _lowpass_noise(rng, t.size, 1.0 / (t[1] - t[0]), ns.wander_cutoff_hz, ns.wander_sigma)
    return out


def truth_rate_series(
    profile: RateProfile,
    duration_s: float,
    fs: float,
    window_s: float = 10.0,
    hop_s: float = 1.0,
) -> HrSeries:
    """Windowed mean of the instantaneous rate, on the same center grid the
    spectral estimators use (integer center index start + width // 2)."""
    t = _grid(duration_s, fs)
    inst = profile.at(t, duration_s)
    width = int(round(window_s * fs))
    hop = max(1, int(round(hop_s * fs)))
    wins = sliding_windows(t.size, width, hop)
    centers = np.array([t[w.center()] for w in wins])
    bpm = np.array([inst[w.start : w.stop].mean() for w in wins])
    return HrSeries(centers, bpm, window_s=window_s, hop_s=hop_s)


def gen_contact_channels(
    spec: SubjectSpec, hr_window_s: float = 10.0, hr_hop_s: float = 1.0
) -> tuple[ChannelSet, GuideRate, HrSeries]:
    """Contact-PPG channels for every site, guide rate, and true HR series."""
    t = _grid(spec.duration_s, spec.fs_contact)
    resp = _resp_wave(spec, t)
    channels: dict[str, TimeSeries] = {}
    for idx, site in enumerate(spec.sites):
        pulse = _pulse(spec, t, site.transit_ms)
        wave = pulse * (1.0 + spec.am_depth * resp) + spec.resp_baseline * resp
        wave += _site_noise(spec, site, t, _STREAM_SITES + idx)
        channels[site.name] = TimeSeries(wave, spec.fs_contact, 0.0)

    tg = _grid(spec.duration_s, spec.fs_guide)
    jitter = _rng(spec, _STREAM_GUIDE).uniform(
        -spec.guide_jitter_bpm, spec.guide_jitter_bpm, tg.size
    )
    guide = GuideRate(tg, spec.hr.at(tg, spec.duration_s) + jitter)
    truth = truth_rate_series(spec.hr, spec.duration_s, spec.fs_contact, hr_window_s, hr_hop_s)
    return ChannelSet(channels), guide, truth


def gen_rgb_trace(
    spec: SubjectSpec,
    site: SiteSpec | None = None,
    pulse_strength: float = 0.005,
    base_rgb: tuple[float, float, float] = (170.0, 120.0, 95.0),
    attack: AttackSpec | None = None,
    flicker_hz: float | None = None,
    flicker_amp: float = 0.0,
    trace_noise_db: float | None = None,
) -> RgbTrace:
    """RGB skin trace with a weak hemoglobin-directed pulse.

    Channel k = base_k * (1 + pulse_strength * hemo_k * pulse(t) + extras):
    extras are an equal-channel illumination flicker and/or the anti-phase
    R/G attack. ``trace_noise_db`` adds white noise per channel at the given
    SNR relative to that channel's pulsatile component.
    """
    if not (0.0 < pulse_strength <= 0.05):
        raise ValidationError("pulse_strength must lie in (0, 0.05]")
    t = _grid(spec.duration_s, spec.fs_video)
    if site is None:
        site = spec.sites[0]
    pulse = _pulse(spec, t, site.transit_ms)
    pulse = pulse * (1.0 + spec.am_depth * _resp_wave(spec, t))

    mods = []
    for k in range(3):
        mods.append(pulse_strength * HEMOGLOBIN_RGB[k] * pulse)
    if flicker_hz is not None and flicker_amp:
        flick = flicker_amp * np.sin(2.0 * np.pi * flicker_hz * t)
        mods = [m + flick for m in mods]
    if attack is not None:
        blink = np.sin(2.0 * np.pi * attack.freq_bpm / 60.0 * t) * attack.ramp(t)
        mods[0] = mods[0] + blink
        mods[1] = mods[1] - blink

    rng = _rng(spec, _STREAM_TRACE)
    chans = []
    for k in range(3):
        ch = base_rgb[k] * (1.0 + mods[k])
        if trace_noise_db is not None:
            pulsatile = base_rgb[k] * pulse_strength * HEMOGLOBIN_RGB[k] * pulse
            sigma = np.sqrt(np.mean(pulsatile**2)) * 10.0 ** (-trace_noise_db / 20.0)
            ch = ch + rng.normal(0.0, sigma, t.size)
        chans.append(ch)
    return RgbTrace(chans[0], chans[1], chans[2], spec.fs_video, 0.0)


def gen_motion_matrix(
    spec: SubjectSpec,
    n_signal_cols: int = 5,
    amplitude: float = 1.0,
    noise_sigma: float = 0.1,
    signal_cols: tuple[int, ...] | None = None,
) -> tuple[MotionMatrix, HrSeries]:
    """Chest-motion feature matrix: a few cells carry the breathing motion,
    the rest are noise. Returns the matrix and the true rate series."""
    t = _grid(spec.duration_s, spec.fs_video)
    resp = _resp_wave(spec, t)
    rng = _rng(spec, _STREAM_MOTION)
    vals = rng.normal(0.0, noise_sigma, (t.size, MOTION_CELLS)) if noise_sigma > 0 else np.zeros((t.size, MOTION_CELLS))
    cols = signal_cols if signal_cols is not None else tuple(range(n_signal_cols))
    for j in cols:
        vals[:, j] += amplitude * resp
    truth = truth_rate_series(spec.resp, spec.duration_s, spec.fs_video, 30.0, 1.0)
    return MotionMatrix(vals, spec.fs_video, 0.0), truth


def _texture(y: np.ndarray, x: np.ndarray) -> np.ndarray:
    """Smooth 2-D pattern with strong vertical structure."""
    return (
        128.0
        + 52.0 * np.sin(2.0 * np.pi * 0.071 * y + 1.1)
        + 31.0 * np.sin(2.0 * np.pi * 0.053 * x + 0.3)
        + 22.0 * np.sin(2.0 * np.pi * 0.031 * (x + 0.7 * y))
    )


def gen_frame_sequence(
    spec: SubjectSpec,
    height: int = 60,
    width: int = 60,
    amp_px: float = 3.0,
) -> tuple[np.ndarray, HrSeries]:
    """Grayscale frames of a textured surface oscillating vertically with
    the breathing profile. Returns (frames uint8 (N, H, W), true rates)."""
    t = _grid(spec.duration_s, spec.fs_video)
    disp = amp_px * _resp_wave(spec, t)
    ys = np.arange(height)[:, None]
    xs = np.arange(width)[None, :]
    frames = np.empty((t.size, height, width), dtype=np.uint8)
    for i, d in enumerate(disp):
        frames[i] = np.clip(_texture(ys - d, xs), 0, 255).astype(np.uint8)
    truth = truth_rate_series(spec.resp, spec.duration_s, spec.fs_video, 30.0, 1.0)
    return frames, truth
