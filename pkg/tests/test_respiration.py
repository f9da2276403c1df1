"""Respiration from contact PPG and from chest motion."""

import numpy as np
import pytest
from numpy.testing import assert_allclose

from pulsekit.core import ChannelSet, TimeSeries
from pulsekit.dsp import band_snr
from pulsekit.errors import (
    AllChannelsDeadError,
    SignalTooShortError,
    ValidationError,
    ZeroVarianceError,
)
from pulsekit.respiration import (
    MOTION_CELLS,
    MotionMatrix,
    RespConfig,
    estimate_resp_rate,
    resp_from_motion,
    resp_from_ppg,
    zca_whiten,
)
from pulsekit.synth import RateProfile, SiteSpec, SubjectSpec, gen_contact_channels, gen_motion_matrix


def breathing_subject(duration=120.0, resp=None, seed=0, n_sites=9):
    return SubjectSpec(
        duration_s=duration,
        fs_contact=100.0,
        sites=tuple(SiteSpec(f"s{i}") for i in range(n_sites)),
        resp=resp or RateProfile(start_bpm=15.0),
        seed=seed,
    )


# ---------------------------------------------------------------- ppg route


def test_ppg_route_recovers_breathing_rate():
    ch, _, _ = gen_contact_channels(breathing_subject())
    wave = resp_from_ppg(ch)
    rates = estimate_resp_rate(wave)
    assert len(rates) > 0
    assert np.max(np.abs(rates.bpm - 15.0)) < 0.5


def test_ppg_route_single_clean_sinusoid():
    fs = 50.0
    t = np.arange(int(fs * 60)) / fs
    x = np.sin(2 * np.pi * 0.25 * t)  # 15 breaths/min
    out = resp_from_ppg(ChannelSet({"only": TimeSeries(x, fs)}))
    rates = estimate_resp_rate(out)
    assert np.max(np.abs(rates.bpm - 15.0)) < 0.1
    # the passband leaves the tone essentially untouched
    interior = slice(len(t) // 4, -len(t) // 4)
    z = x / x.std()
    assert np.max(np.abs(out.values[interior] - z[interior])) < 0.05


def test_ppg_route_rejects_pulse_band():
    fs = 100.0
    t = np.arange(int(fs * 60)) / fs
    pulse_only = np.sin(2 * np.pi * 1.2 * t)
    out = resp_from_ppg(ChannelSet({"a": TimeSeries(pulse_only, fs)}))
    # z-normalized input has unit power; in-band residue is tiny
    assert np.mean(out.values**2) < 0.01


def test_ppg_route_skips_dead_channels_with_warning():
    fs = 50.0
    t = np.arange(int(fs * 60)) / fs
    live = TimeSeries(np.sin(2 * np.pi * 0.25 * t), fs)
    dead = TimeSeries(np.full(t.size, 2.0), fs)
    with pytest.warns(UserWarning, match="constant"):
        out = resp_from_ppg(ChannelSet({"live": live, "dead": dead}))
    ref = resp_from_ppg(ChannelSet({"live": live}))
    assert_allclose(out.values, ref.values)
    with pytest.raises(AllChannelsDeadError), pytest.warns(UserWarning):
        resp_from_ppg(ChannelSet({"dead": dead}))


def test_ppg_route_gain_and_order_invariance():
    ch, _, _ = gen_contact_channels(breathing_subject(duration=60.0, n_sites=3))
    ref = resp_from_ppg(ch)
    scaled = ChannelSet(
        {
            "s0": TimeSeries(5.0 * ch["s0"].values, 100.0),
            "s1": TimeSeries(0.01 * ch["s1"].values, 100.0),
            "s2": ch["s2"],
        }
    )
    assert np.max(np.abs(resp_from_ppg(scaled).values - ref.values)) < 1e-9


# ---------------------------------------------------------------- zca


def rand_motion(n=2000, seed=0, scale=None):
    rng = np.random.default_rng(seed)
    x = rng.standard_normal((n, MOTION_CELLS))
    if scale is not None:
        x *= scale
    return MotionMatrix(x, fs=20.0)


def cov_max_dev(values):
    x = values - values.mean(axis=0)
    cov = x.T @ x / x.shape[0]
    return np.max(np.abs(cov - np.eye(cov.shape[0])))


def test_zca_diagonal_covariance_analytic():
    # independent columns with known variances: whitening just rescales
    rng = np.random.default_rng(1)
    sd = np.linspace(0.5, 4.0, MOTION_CELLS)
    n = 200_000  # sample covariance converges ~ 1/sqrt(n)
    x = rng.standard_normal((n, MOTION_CELLS)) * sd
    res = zca_whiten(MotionMatrix(x, 20.0), epsilon=1e-12)
    assert cov_max_dev(res.matrix.values) < 1e-8 + 0.05
    assert not res.rank_deficient
    # exact check: output covariance of the *sample* is identity
    assert cov_max_dev(zca_whiten(rand_motion(), 1e-12).matrix.values) < 1e-6


def test_zca_output_covariance_is_identity():
    res = zca_whiten(rand_motion(seed=3), epsilon=1e-12)
    assert cov_max_dev(res.matrix.values) < 1e-6


def test_zca_idempotent():
    once = zca_whiten(rand_motion(seed=5), epsilon=1e-12).matrix
    twice = zca_whiten(once, epsilon=1e-12).matrix
    assert np.max(np.abs(twice.values - once.values)) < 1e-6


def test_zca_duplicate_column_flags_rank_deficiency():
    m = rand_motion(seed=7)
    vals = m.values.copy()
    vals[:, 17] = vals[:, 3]
    res = zca_whiten(MotionMatrix(vals, m.fs))
    assert res.rank_deficient


def test_zca_guards():
    with pytest.raises(ValidationError):
        zca_whiten(MotionMatrix(np.zeros((50, MOTION_CELLS)), 20.0))
    with pytest.raises(ZeroVarianceError):
        zca_whiten(MotionMatrix(np.zeros((200, MOTION_CELLS)), 20.0))
    with pytest.raises(ValidationError):
        MotionMatrix(np.zeros((200, 64)), 20.0)
    with pytest.raises(ValidationError):
        MotionMatrix(np.full((200, MOTION_CELLS), np.nan), 20.0)


# ---------------------------------------------------------------- motion route


def test_motion_route_recovers_rate():
    m, _ = gen_motion_matrix(SubjectSpec(duration_s=120.0, seed=2), n_signal_cols=5)
    wave = resp_from_motion(m)
    rates = estimate_resp_rate(wave)
    assert len(rates) > 0
    assert np.max(np.abs(rates.bpm - 15.0)) < 0.5


def test_motion_route_column_permutation_invariant():
    m, _ = gen_motion_matrix(SubjectSpec(duration_s=60.0, seed=4), n_signal_cols=5)
    rng = np.random.default_rng(0)
    perm = rng.permutation(MOTION_CELLS)
    shuffled = MotionMatrix(m.values[:, perm], m.fs)
    a = estimate_resp_rate(resp_from_motion(m))
    b = estimate_resp_rate(resp_from_motion(shuffled))
    assert_allclose(a.bpm, b.bpm, atol=0.06)


def test_motion_route_all_noise_is_low_confidence():
    flagged = 0
    for seed in range(20):
        m, _ = gen_motion_matrix(
            SubjectSpec(duration_s=60.0, seed=seed), n_signal_cols=0, noise_sigma=0.5
        )
        wave = resp_from_motion(m)
        snr = band_snr(wave, (10 / 60.0, 20 / 60.0))
        rates = estimate_resp_rate(wave)
        if snr < 2.0 and len(rates) < 10:
            flagged += 1
    assert flagged >= 18  # noise must almost never masquerade as breathing


def test_motion_route_needs_thirty_seconds():
    short = MotionMatrix(np.random.default_rng(0).standard_normal((400, MOTION_CELLS)), 20.0)
    with pytest.raises(SignalTooShortError):
        resp_from_motion(short)


# ---------------------------------------------------------------- rate gate


def test_rate_pure_tone():
    fs = 20.0
    t = np.arange(int(fs * 90)) / fs
    rates = estimate_resp_rate(TimeSeries(np.sin(2 * np.pi * 0.25 * t), fs))
    assert np.max(np.abs(rates.bpm - 15.0)) < 0.1


def test_rate_chirp_tracks_within_one():
    fs = 20.0
    duration = 120.0
    t = np.arange(int(fs * duration)) / fs
    bpm = 10.0 + 10.0 * t / duration
    phase = 2 * np.pi * np.cumsum(bpm / 60.0) / fs
    rates = estimate_resp_rate(TimeSeries(np.sin(phase), fs))
    width = int(30.0 * fs)
    starts = (np.round((rates.t - 15.0) * fs)).astype(int)
    truth = np.array([bpm[s : s + width].mean() for s in starts])
    assert np.max(np.abs(rates.bpm - truth)) < 1.0


def test_rate_gates_out_empty_band():
    # pulse-rate-band-only content: nothing to report in 6-30 breaths/min
    fs = 20.0
    t = np.arange(int(fs * 60)) / fs
    pulse_only = TimeSeries(np.sin(2 * np.pi * 1.2 * t), fs)
    rates = estimate_resp_rate(pulse_only)
    assert len(rates) == 0


def test_rate_gates_out_inband_noise():
    # broadband noise inside the band: a peak exists but never dominates
    rng = np.random.default_rng(13)
    fs = 20.0
    kept = 0
    total = 0
    for _ in range(10):
        ts = TimeSeries(rng.standard_normal(int(fs * 60)), fs)
        rates = estimate_resp_rate(ts)
        kept += len(rates)
        total += 31
    assert kept / total < 0.2


def test_fm_breathing_both_routes_track():
    # frequency-modulated breathing, 10-20 breaths/min over two minutes
    resp = RateProfile("piecewise", knots_t=(0.0, 40.0, 80.0, 120.0), knots_bpm=(10.0, 20.0, 12.0, 18.0))
    spec = SubjectSpec(
        duration_s=120.0,
        fs_contact=100.0,
        sites=tuple(SiteSpec(f"s{i}") for i in range(9)),
        resp=resp,
        seed=6,
    )
    ch, _, _ = gen_contact_channels(spec)
    m, truth_motion = gen_motion_matrix(spec, n_signal_cols=5)

    def mae_vs_truth(rates):
        width = int(30.0 * spec_fs)
        starts = (np.round((rates.t - 15.0) * spec_fs)).astype(int)
        truth = np.array([inst[s : s + width].mean() for s in starts])
        return np.mean(np.abs(rates.bpm - truth))

    spec_fs = 100.0
    t = np.arange(int(spec_fs * 120.0)) / spec_fs
    inst = resp.at(t, 120.0)
    ppg_rates = estimate_resp_rate(resp_from_ppg(ch))
    assert len(ppg_rates) > 60
    assert mae_vs_truth(ppg_rates) <= 1.09

    spec_fs = spec.fs_video
    t = np.arange(int(spec_fs * 120.0)) / spec_fs
    inst = resp.at(t, 120.0)
    motion_rates = estimate_resp_rate(resp_from_motion(m))
    assert len(motion_rates) > 60
    assert mae_vs_truth(motion_rates) <= 1.09
