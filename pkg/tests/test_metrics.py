"""Rate-error metrics and waveform correlation."""

import numpy as np
import pytest
from hypothesis import given, strategies as st

from pulsekit.core import HrSeries, TimeSeries
from pulsekit.errors import MisalignedSeriesError, ValidationError, ZeroVarianceError
from pulsekit.metrics import hr_error_report, hr_errors, mxcorr, pearson, waveform_corr


def series(bpm, hop=1.0):
    bpm = np.asarray(bpm, dtype=float)
    return HrSeries(np.arange(bpm.size) * hop, bpm)


def test_hr_errors_identical_and_offset():
    truth = series([70.0, 80.0, 90.0])
    assert hr_errors(truth, series([70.0, 80.0, 90.0])) == (0.0, 0.0, 0.0)
    me, mae, rmse = hr_errors(truth, series([72.0, 82.0, 92.0]))
    assert (me, mae, rmse) == (2.0, 2.0, 2.0)


def test_hr_errors_hand_computed():
    # diffs (2, -3, 5): ME = 4/3, MAE = 10/3, RMSE = sqrt(38/3)
    me, mae, rmse = hr_errors(series([70.0, 80.0, 90.0]), series([72.0, 77.0, 95.0]))
    assert me == pytest.approx(4.0 / 3.0)
    assert mae == pytest.approx(10.0 / 3.0)
    assert rmse == pytest.approx(np.sqrt(38.0 / 3.0))


def test_hr_errors_alignment_guards():
    truth = series([70.0, 80.0, 90.0])
    with pytest.raises(MisalignedSeriesError):
        hr_errors(truth, series([70.0, 80.0]))
    shifted = HrSeries(np.arange(3) + 0.6, np.array([70.0, 80.0, 90.0]))
    with pytest.raises(MisalignedSeriesError):
        hr_errors(truth, shifted)
    # within half a hop is accepted
    near = HrSeries(np.arange(3) + 0.4, np.array([70.0, 80.0, 90.0]))
    hr_errors(truth, near)


@given(
    st.lists(
        st.tuples(st.floats(40, 180), st.floats(40, 180)), min_size=1, max_size=60
    )
)
def test_error_ordering_property(pairs):
    truth = series([p[0] for p in pairs])
    pred = series([p[1] for p in pairs])
    me, mae, rmse = hr_errors(truth, pred)
    assert abs(me) <= mae + 1e-12
    assert mae <= rmse + 1e-12


def test_pearson_endpoints():
    x = np.array([1.0, 2.0, 4.0, 7.0])
    assert pearson(x, x) == pytest.approx(1.0)
    assert pearson(x, -x) == pytest.approx(-1.0)
    with pytest.raises(ZeroVarianceError):
        pearson(x, np.full(4, 3.0))
    with pytest.raises(ValidationError):
        pearson(x, np.zeros(5))


@given(
    st.lists(st.floats(-100, 100), min_size=3, max_size=40),
    st.floats(0.1, 50),
    st.floats(-100, 100),
)
def test_pearson_affine_invariance(xs, a, b):
    x = np.asarray(xs)
    y = np.sin(np.arange(x.size))  # fixed partner with spread
    if x.std() == 0:
        return
    r1 = pearson(x, y)
    r2 = pearson(a * x + b, y)
    assert r1 == pytest.approx(r2, abs=1e-9)


def test_waveform_corr_independent_noise_is_small():
    rng = np.random.default_rng(5)
    hits = 0
    for _ in range(100):
        a = TimeSeries(rng.standard_normal(10_000), 100.0)
        b = TimeSeries(rng.standard_normal(10_000), 100.0)
        if abs(waveform_corr(a, b)) < 0.05:
            hits += 1
    assert hits >= 95


def test_mxcorr_recovers_constructed_shift():
    fs = 100.0
    t = np.arange(int(fs * 60)) / fs
    x = np.sin(2 * np.pi * 1.2 * t) + 0.5 * np.sin(2 * np.pi * 2.4 * t)
    shift = int(0.3 * fs)
    a = TimeSeries(x, fs)
    b = TimeSeries(np.roll(x, shift), fs)  # b delayed by 0.3 s
    r, lag = mxcorr(a, b)
    assert r > 0.99
    assert lag == pytest.approx(0.3, abs=1.0 / fs)


def test_mxcorr_identity_and_orthogonal_tones():
    fs = 100.0
    t = np.arange(int(fs * 60)) / fs
    a = TimeSeries(np.sin(2 * np.pi * 1.2 * t), fs)
    r, lag = mxcorr(a, a.copy())
    assert r == pytest.approx(1.0)
    assert lag == 0.0
    b = TimeSeries(np.sin(2 * np.pi * 1.7 * t), fs)
    r_ortho, _ = mxcorr(a, b)
    assert r_ortho < 0.1


def test_mxcorr_overlap_guard():
    a = TimeSeries(np.arange(32.0), 16.0)
    with pytest.raises(MisalignedSeriesError):
        mxcorr(a, a.copy(), max_lag_s=2.0)


def test_hr_error_report_bundles_everything():
    fs = 50.0
    t = np.arange(int(fs * 30)) / fs
    wave = TimeSeries(np.sin(2 * np.pi * 1.2 * t), fs)
    truth = series([72.0, 72.0, 72.0])
    pred = series([73.0, 71.0, 72.0])
    rep = hr_error_report(truth, pred, wave, wave.copy())
    assert rep.n_windows == 3
    assert rep.mae == pytest.approx(2.0 / 3.0)
    assert rep.r_wave == pytest.approx(1.0)
    assert rep.mxcorr == pytest.approx(1.0)
    d = rep.as_dict()
    assert d["mae_bpm"] == rep.mae
    # without waveforms the correlation slots stay NaN
    bare = hr_error_report(truth, pred)
    assert np.isnan(bare.r_wave) and np.isnan(bare.mxcorr)
