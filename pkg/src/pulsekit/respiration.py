"""Respiration waveform and rate, two ways.

Contact route: z-normalize each PPG channel over the whole recording,
bandpass 6-24 breaths/min (order 3), sum.

Motion route: whiten an N x 100 matrix of vertical chest-motion features
(10 x 10 grid cells) with zero-phase component analysis, score every
component by its 10-20 breaths/min band SNR, and average the three best
after sign alignment.

Rates come from the same windowed spectral-peak estimator as pulse rate,
restricted to 6-30 breaths/min, with windows lacking a dominant in-band
peak dropped as gaps.
"""

from __future__ import annotations

import warnings
from dataclasses import dataclass

import numpy as np

from .core import ChannelSet, HrSeries, TimeSeries, znormalize
from .dsp import BandpassSpec, band_snr, bandpass, spectral_rate_series
from .errors import (
    AllChannelsDeadError,
    SignalTooShortError,
    ValidationError,
    ZeroVarianceError,
)
from .metrics import pearson

__all__ = [
    "RespConfig",
    "MotionMatrix",
    "ZcaResult",
    "resp_from_ppg",
    "zca_whiten",
    "resp_from_motion",
    "estimate_resp_rate",
]

MOTION_CELLS = 100  # 10 x 10 grid, flattened


@dataclass(frozen=True)
class RespConfig:
    ppg_band_bpm: tuple[float, float] = (6.0, 24.0)
    ppg_order: int = 3
    snr_band_bpm: tuple[float, float] = (10.0, 20.0)
    n_components: int = 3
    rate_band_bpm: tuple[float, float] = (6.0, 30.0)
    rate_window_s: float = 30.0
    rate_hop_s: float = 1.0
    min_dominance: float = 4.0  # peak / median in-band magnitude gate
    min_band_fraction: float = 0.05  # in-band share of total power gate
    zca_epsilon: float = 1e-6  # relative to the largest eigenvalue


@dataclass
class MotionMatrix:
    """Per-frame vertical motion of the 100 grid cells (pixels/frame)."""

    values: np.ndarray
    fs: float
    t0: float = 0.0

    def __post_init__(self):
        self.values = np.asarray(self.values, dtype=float)
        if self.values.ndim != 2 or self.values.shape[1] != MOTION_CELLS:
            raise ValidationError(
                f"motion matrix must be N x {MOTION_CELLS}, got {self.values.shape}"
            )
        if not np.all(np.isfinite(self.values)):
            raise ValidationError("motion matrix contains non-finite entries")
        if self.fs <= 0:
            raise ValidationError(f"fs must be positive, got {self.fs}")

    @property
    def n_frames(self) -> int:
        return self.values.shape[0]

    @property
    def duration(self) -> float:
        return self.n_frames / self.fs


@dataclass
class ZcaResult:
    matrix: MotionMatrix
    eigenvalues: np.ndarray
    rank_deficient: bool


def resp_from_ppg(channels: ChannelSet, cfg: RespConfig = RespConfig()) -> TimeSeries:
    """Sum of z-normalized, respiration-bandpassed PPG channels.

    Dead (constant) channels are skipped with a warning; if none survive,
    AllChannelsDeadError is raised.
    """
    fs = channels.common_fs()
    spec = BandpassSpec.per_minute(*cfg.ppg_band_bpm, order=cfg.ppg_order)
    first = channels[channels.names()[0]]
    total = np.zeros(len(first))
    alive = 0
    for name in channels.names():
        ts = channels[name]
        try:
            z = znormalize(ts.values)
        except ZeroVarianceError:
            warnings.warn(f"channel {name!r} is constant; skipped", stacklevel=2)
            continue
        total += bandpass(TimeSeries(z, fs, ts.t0), spec).values
        alive += 1
    if alive == 0:
        raise AllChannelsDeadError("every channel is constant")
    return TimeSeries(total, fs, first.t0)


def zca_whiten(m: MotionMatrix, epsilon: float = 1e-6) -> ZcaResult:
    """Zero-phase component analysis whitening.

    Columns are centered; with covariance eigendecomposition C = U L U^T the
    transform is W = U (L + eps I)^(-1/2) U^T applied on the right, where
    eps = epsilon * max(L). Output covariance is the identity up to the
    regularization. ``rank_deficient`` reports eigenvalues below eps.
    """
    if m.n_frames <= MOTION_CELLS:
        raise ValidationError(
            f"whitening needs more than {MOTION_CELLS} frames, got {m.n_frames}"
        )
    x = m.values - m.values.mean(axis=0)
    cov = x.T @ x / m.n_frames
    lam, u = np.linalg.eigh(cov)
    if lam.max() <= 0.0:
        raise ZeroVarianceError("motion matrix has no variance to whiten")
    eps_abs = epsilon * lam.max()
    rank_deficient = bool(np.any(lam < eps_abs))
    w = (u / np.sqrt(lam + eps_abs)) @ u.T
    out = MotionMatrix(x @ w, m.fs, m.t0)
    return ZcaResult(out, lam, rank_deficient)


def resp_from_motion(m: MotionMatrix, cfg: RespConfig = RespConfig()) -> TimeSeries:
    """Respiration waveform from chest vertical-motion features.

    Whitens the matrix, ranks components by band SNR over the scoring band,
    sign-aligns the top ``n_components`` to the best one (anti-phase
    components would cancel) and averages them.
    """
    if m.duration < 30.0:
        raise SignalTooShortError(
            f"motion route needs >= 30 s, got {m.duration:.1f} s"
        )
    res = zca_whiten(m, cfg.zca_epsilon)
    if res.rank_deficient:
        warnings.warn("motion matrix is rank deficient; whitening regularized", stacklevel=2)
    comps = res.matrix.values
    band_hz = (cfg.snr_band_bpm[0] / 60.0, cfg.snr_band_bpm[1] / 60.0)
    snr = np.array(
        [band_snr(TimeSeries(comps[:, j], m.fs, m.t0), band_hz) for j in range(comps.shape[1])]
    )
    order = np.argsort(-snr, kind="stable")[: cfg.n_components]
    ref = comps[:, order[0]]
    picked = []
    for j in order:
        c = comps[:, j]
        try:
            flip = pearson(c, ref) < 0
        except ZeroVarianceError:
            flip = False
        picked.append(-c if flip else c)
    wave = np.mean(picked, axis=0)
    return TimeSeries(wave, m.fs, m.t0)


def estimate_resp_rate(
    ts: TimeSeries,
    window_s: float = 30.0,
    hop_s: float = 1.0,
    band_bpm: tuple[float, float] = (6.0, 30.0),
    min_dominance: float = 4.0,
    min_band_fraction: float = 0.05,
) -> HrSeries:
    """Windowed respiration rate (breaths/min) with quality gating.

    Windows whose spectral peak does not dominate the in-band background,
    or whose in-band power share is negligible (no respiration present),
    are dropped; the returned series may therefore have gaps or be empty.
    """
    band_hz = (band_bpm[0] / 60.0, band_bpm[1] / 60.0)
    centers, bpm, dom, frac = spectral_rate_series(ts, window_s, hop_s, band_hz)
    keep = (dom >= min_dominance) & (frac >= min_band_fraction)
    return HrSeries(
        centers[keep], bpm[keep], window_s=window_s, hop_s=hop_s, quality=dom[keep]
    )
