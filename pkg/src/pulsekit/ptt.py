"""Pulse transit time between body sites via sliding cross-correlation.

For each analysis window the lag maximizing the Pearson correlation between
the two (already bandpassed) pulse waveforms is found over a bounded lag
range. Sign convention: a positive lag means the second signal is delayed
relative to the first, so for sites "X to Y" the transit time is the lag of
Y behind X.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .core import LagSeries, TimeSeries, align_pair
from .errors import AllRejectedError, InsufficientDataError, SignalTooShortError, ValidationError
from .stats import TestResult, bartlett, bonferroni, kruskal_wallis, shapiro_wilk

__all__ = ["PttConfig", "PttSummary", "sliding_xcorr_lag", "ptt_summary", "ptt_site_analysis"]


@dataclass(frozen=True)
class PttConfig:
    window_s: float = 5.0
    stride_s: float = 0.010
    max_lag_s: float = 0.300
    accept_lag_s: float = 0.200
    subsample: bool = True  # parabolic peak refinement
    min_peak_r: float = 0.3  # windows below this stay in the series, flagged

    def __post_init__(self):
        if self.max_lag_s >= self.window_s / 2:
            raise ValidationError("max_lag must be below half the window")
        if self.accept_lag_s > self.max_lag_s:
            raise ValidationError("accept_lag cannot exceed max_lag")
        if min(self.window_s, self.stride_s, self.max_lag_s, self.accept_lag_s) <= 0:
            raise ValidationError("all durations must be positive")


@dataclass
class PttSummary:
    mean_ms: float
    median_ms: float
    iqr_ms: float
    n_total: int
    n_retained: int

    @property
    def retention(self) -> float:
        return self.n_retained / self.n_total if self.n_total else 0.0

    def as_dict(self) -> dict:
        return {
            "mean_ms": self.mean_ms,
            "median_ms": self.median_ms,
            "iqr_ms": self.iqr_ms,
            "n_total": self.n_total,
            "n_retained": self.n_retained,
            "retention": self.retention,
        }


def _window_sums(c: np.ndarray, starts: np.ndarray, width: int) -> np.ndarray:
    return c[starts + width] - c[starts]


def sliding_xcorr_lag(x: TimeSeries, y: TimeSeries, cfg: PttConfig = PttConfig()) -> LagSeries:
    """Per-window lag of ``y`` behind ``x`` maximizing Pearson correlation.

    Windows where either side is constant are dropped (a gap, not a value).
    With ``cfg.subsample`` a parabola through the peak and its neighbors
    refines the lag below the sample period; the refinement never moves the
    peak by more than one sample and is skipped at the lag range ends.
    """
    xv, yv, fs, t0 = align_pair(x, y)
    n = xv.size
    width = int(round(cfg.window_s * fs))
    step = max(1, int(round(cfg.stride_s * fs)))
    k_max = int(round(cfg.max_lag_s * fs))
    first = k_max
    last = n - width - k_max
    if width < 4 or last < first:
        raise SignalTooShortError(
            f"need at least {width + 2 * k_max} overlapping samples, got {n}"
        )
    starts = np.arange(first, last + 1, step)

    cx = np.concatenate(([0.0], np.cumsum(xv)))
    cxx = np.concatenate(([0.0], np.cumsum(xv * xv)))
    cy = np.concatenate(([0.0], np.cumsum(yv)))
    cyy = np.concatenate(([0.0], np.cumsum(yv * yv)))

    sx = _window_sums(cx, starts, width)
    sxx = _window_sums(cxx, starts, width)
    var_x = sxx - sx * sx / width

    lags = np.arange(-k_max, k_max + 1)
    r = np.full((lags.size, starts.size), -np.inf)
    for li, k in enumerate(lags):
        ys = starts + k
        sy = _window_sums(cy, ys, width)
        syy = _window_sums(cyy, ys, width)
        var_y = syy - sy * sy / width
        if k >= 0:
            prod = xv[: n - k] * yv[k:] if k else xv * yv
            cp = np.concatenate(([0.0], np.cumsum(prod)))
            sxy = _window_sums(cp, starts, width)
        else:
            prod = xv[-k:] * yv[: n + k]
            cp = np.concatenate(([0.0], np.cumsum(prod)))
            sxy = _window_sums(cp, starts + k, width)
        cov = sxy - sx * sy / width
        den = var_x * var_y
        good = den > 0
        r[li, good] = cov[good] / np.sqrt(den[good])

    valid = np.isfinite(r).all(axis=0)
    peak_idx = np.argmax(r, axis=0)
    rows = np.arange(starts.size)
    peak_r = r[peak_idx, rows]

    lag_samples = lags[peak_idx].astype(float)
    if cfg.subsample and lags.size >= 3:
        interior = (peak_idx > 0) & (peak_idx < lags.size - 1) & valid
        im = np.where(interior, peak_idx, 1)
        rm = r[im - 1, rows]
        rp = r[im + 1, rows]
        r0 = r[im, rows]
        # dropped windows hold -inf correlations; their delta is masked below
        with np.errstate(divide="ignore", invalid="ignore"):
            denom = rm - 2.0 * r0 + rp
            delta = 0.5 * (rm - rp) / denom
        delta = np.where(np.isfinite(delta), delta, 0.0)
        delta = np.clip(delta, -1.0, 1.0)
        lag_samples = lag_samples + np.where(interior, delta, 0.0)

    centers = t0 + (starts + width // 2) / fs
    keep = valid
    return LagSeries(
        t=centers[keep],
        lag_ms=lag_samples[keep] * 1000.0 / fs,
        peak_r=peak_r[keep],
    )


def ptt_summary(series: LagSeries, cfg: PttConfig = PttConfig()) -> PttSummary:
    """Mean/median/IQR over windows with |lag| within the acceptance bound."""
    if len(series) == 0:
        raise AllRejectedError("empty lag series")
    keep = np.abs(series.lag_ms) <= cfg.accept_lag_s * 1000.0
    if not keep.any():
        raise AllRejectedError(
            f"no lags within +/-{cfg.accept_lag_s * 1000:.0f} ms of zero"
        )
    lags = series.lag_ms[keep]
    q25, q75 = np.percentile(lags, [25, 75])
    return PttSummary(
        mean_ms=float(lags.mean()),
        median_ms=float(np.median(lags)),
        iqr_ms=float(q75 - q25),
        n_total=len(series),
        n_retained=int(keep.sum()),
    )


def ptt_site_analysis(
    groups: dict[str, np.ndarray], alpha: float = 0.05, m: int | None = None
) -> list[TestResult]:
    """Test battery over per-subject transit-time means grouped by site.

    Runs Shapiro-Wilk per group, Bartlett across groups, and Kruskal-Wallis
    across groups, with a Bonferroni-corrected threshold (m defaults to the
    number of tests in the battery).
    """
    if len(groups) < 2:
        raise InsufficientDataError("site analysis needs at least 2 groups")
    for name, vals in groups.items():
        if np.asarray(vals).size < 3:
            raise InsufficientDataError(f"group {name!r} has fewer than 3 subjects")
    names = sorted(groups)
    n_tests = len(names) + 2
    corrected = bonferroni(alpha, m if m is not None else n_tests)
    results = [
        shapiro_wilk(groups[name], alpha=corrected, name=f"shapiro_{name}")
        for name in names
    ]
    ordered = [np.asarray(groups[name], dtype=float) for name in names]
    results.append(bartlett(ordered, alpha=corrected))
    results.append(kruskal_wallis(ordered, alpha=corrected))
    return results
