"""Agreement metrics between estimated and reference rate series / waveforms."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .core import HrSeries, TimeSeries, align_pair
from .errors import MisalignedSeriesError, ValidationError, ZeroVarianceError

__all__ = [
    "HrErrorReport",
    "hr_errors",
    "hr_error_report",
    "pearson",
    "waveform_corr",
    "mxcorr",
]


@dataclass
class HrErrorReport:
    me: float
    mae: float
    rmse: float
    r_wave: float
    mxcorr: float
    n_windows: int

    def as_dict(self) -> dict:
        return {
            "me_bpm": self.me,
            "mae_bpm": self.mae,
            "rmse_bpm": self.rmse,
            "r_wave": self.r_wave,
            "mxcorr": self.mxcorr,
            "n_windows": self.n_windows,
        }


def _match_centers(truth: HrSeries, pred: HrSeries) -> None:
    if len(truth) != len(pred):
        raise MisalignedSeriesError(
            f"window counts differ: {len(truth)} vs {len(pred)}"
        )
    if len(truth) == 0:
        raise MisalignedSeriesError("empty rate series")
    hop = float(np.median(np.diff(truth.t))) if len(truth) > 1 else np.inf
    if np.max(np.abs(truth.t - pred.t)) > hop / 2:
        raise MisalignedSeriesError("window centers differ by more than hop/2")


def hr_errors(truth: HrSeries, pred: HrSeries) -> tuple[float, float, float]:
    """Mean error, mean absolute error, root-mean-square error in bpm.

    ME keeps the sign (bias); MAE and RMSE do not. Series must have equal
    length and window centers matching within half a hop.
    """
    _match_centers(truth, pred)
    d = pred.bpm - truth.bpm
    me = float(d.mean())
    mae = float(np.abs(d).mean())
    rmse = float(np.sqrt((d**2).mean()))
    return me, mae, rmse


def pearson(x, y) -> float:
    """Pearson correlation coefficient; both inputs must have spread."""
    x = np.asarray(x, dtype=float)
    y = np.asarray(y, dtype=float)
    if x.shape != y.shape or x.ndim != 1:
        raise ValidationError("pearson expects two equal-length 1-D arrays")
    xd = x - x.mean()
    yd = y - y.mean()
    den = np.sqrt((xd**2).sum() * (yd**2).sum())
    if den == 0.0:
        raise ZeroVarianceError("pearson undefined for a constant input")
    return float((xd * yd).sum() / den)


def waveform_corr(a: TimeSeries, b: TimeSeries) -> float:
    """Pearson r between two same-rate waveforms over their time overlap."""
    av, bv, _, _ = align_pair(a, b)
    return pearson(av, bv)


def mxcorr(a: TimeSeries, b: TimeSeries, max_lag_s: float = 1.0) -> tuple[float, float]:
    """Maximum Pearson r over lags up to +/- max_lag_s.

    Returns (r_max, lag_s); positive lag means ``b`` is delayed relative to
    ``a``. Each lag correlates the overlapping parts of the aligned signals.
    """
    av, bv, fs, _ = align_pair(a, b)
    n = av.size
    k_max = int(round(max_lag_s * fs))
    if n - k_max < 8:
        raise MisalignedSeriesError(
            f"overlap of {n} samples too short for +/-{k_max} sample lags"
        )
    best_r = -np.inf
    best_k = 0
    for k in range(-k_max, k_max + 1):
        if k >= 0:
            r = pearson(av[: n - k], bv[k:])
        else:
            r = pearson(av[-k:], bv[: n + k])
        if r > best_r:
            best_r = r
            best_k = k
    return float(best_r), best_k / fs


def hr_error_report(
    truth: HrSeries,
    pred: HrSeries,
    truth_wave: TimeSeries | None = None,
    pred_wave: TimeSeries | None = None,
) -> HrErrorReport:
    """Bundle rate errors with optional waveform correlations."""
    me, mae, rmse = hr_errors(truth, pred)
    r_wave = mx = float("nan")
    if truth_wave is not None and pred_wave is not None:
        r_wave = waveform_corr(truth_wave, pred_wave)
        mx = mxcorr(truth_wave, pred_wave)[0]
    return HrErrorReport(me, mae, rmse, r_wave, mx, len(truth))
