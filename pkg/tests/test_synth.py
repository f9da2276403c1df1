"""Generator determinism and ground-truth consistency."""

import numpy as np
import pytest
from numpy.testing import assert_array_equal

from pulsekit.errors import ValidationError
from pulsekit.synth import (
    AttackSpec,
    NoiseSpec,
    RateProfile,
    SiteSpec,
    SubjectSpec,
    gen_contact_channels,
    gen_frame_sequence,
    gen_motion_matrix,
    gen_rgb_trace,
    truth_rate_series,
)


def noisy_spec(seed=0):
    return SubjectSpec(
        duration_s=20.0,
        fs_contact=200.0,
        sites=(
            SiteSpec("face", noise=NoiseSpec(white_sigma=0.2, wander_sigma=0.3)),
            SiteSpec(
                "arm",
                transit_ms=20.0,
                noise=NoiseSpec(burst_start_s=5.0, burst_duration_s=2.0, burst_sigma=3.0),
            ),
        ),
        seed=seed,
    )


def test_contact_channels_bit_identical_across_runs():
    a_ch, a_guide, a_truth = gen_contact_channels(noisy_spec())
    b_ch, b_guide, b_truth = gen_contact_channels(noisy_spec())
    for name in a_ch.names():
        assert_array_equal(a_ch[name].values, b_ch[name].values)
    assert_array_equal(a_guide.bpm, b_guide.bpm)
    assert_array_equal(a_truth.bpm, b_truth.bpm)


def test_different_seeds_differ():
    a = gen_contact_channels(noisy_spec(seed=0))[0]
    b = gen_contact_channels(noisy_spec(seed=1))[0]
    assert not np.array_equal(a["face"].values, b["face"].values)


def test_artifact_streams_independent_of_site_count():
    # adding a site must not perturb existing sites' noise draws
    one = SubjectSpec(duration_s=10.0, sites=(SiteSpec("face", noise=NoiseSpec(white_sigma=0.1)),))
    two = SubjectSpec(
        duration_s=10.0,
        sites=(
            SiteSpec("face", noise=NoiseSpec(white_sigma=0.1)),
            SiteSpec("arm", noise=NoiseSpec(white_sigma=0.1)),
        ),
    )
    a = gen_contact_channels(one)[0]["face"].values
    b = gen_contact_channels(two)[0]["face"].values
    assert_array_equal(a, b)


def test_truth_matches_windowed_instantaneous_rate():
    profile = RateProfile("chirp", start_bpm=60.0, end_bpm=100.0)
    truth = truth_rate_series(profile, 60.0, 400.0, window_s=10.0, hop_s=1.0)
    # 10 s window average of a linear chirp = rate at the window midpoint
    t = truth.t
    expect = profile.at(t - 0.5 / 400.0, 60.0)  # integer center rounds down
    assert np.max(np.abs(truth.bpm - expect)) < 0.5


def test_guide_jitter_bounded():
    spec = SubjectSpec(duration_s=30.0, guide_jitter_bpm=1.5)
    _, guide, _ = gen_contact_channels(spec)
    assert np.max(np.abs(guide.bpm - 72.0)) <= 1.5 + 1e-12


def test_transit_shifts_waveform():
    spec = SubjectSpec(
        duration_s=20.0,
        sites=(SiteSpec("face"), SiteSpec("leg", transit_ms=60.0)),
        am_depth=0.0,
        resp_baseline=0.0,
    )
    ch, _, _ = gen_contact_channels(spec)
    face = ch["face"].values
    leg = ch["leg"].values
    shift = int(round(0.060 * spec.fs_contact))  # 24 samples at 400 Hz
    # interior: delayed copy aligns with the original
    a = face[: -shift or None][1000:-1000]
    b = leg[shift:][1000:-1000]
    assert np.max(np.abs(a - b)) < 1e-6


def test_rate_profiles():
    const = RateProfile()
    assert np.all(const.at(np.linspace(0, 10, 5), 10.0) == 72.0)
    chirp = RateProfile("chirp", 60.0, 100.0)
    assert chirp.at(np.array([0.0, 5.0, 10.0]), 10.0) == pytest.approx([60, 80, 100])
    pw = RateProfile("piecewise", knots_t=(0.0, 10.0), knots_bpm=(50.0, 70.0))
    assert pw.at(np.array([5.0]), 10.0) == pytest.approx([60.0])
    with pytest.raises(ValidationError):
        RateProfile("wiggle")
    with pytest.raises(ValidationError):
        RateProfile("piecewise", knots_t=(0.0,), knots_bpm=(50.0,))


def test_spec_validation():
    with pytest.raises(ValidationError):
        SiteSpec("face", transit_ms=250.0)
    with pytest.raises(ValidationError):
        SubjectSpec(duration_s=0.0)
    with pytest.raises(ValidationError):
        SubjectSpec(sites=(SiteSpec("a"), SiteSpec("a")))
    with pytest.raises(ValidationError):
        AttackSpec(freq_bpm=30.0)
    with pytest.raises(ValidationError):
        gen_rgb_trace(SubjectSpec(duration_s=5.0), pulse_strength=0.2)


def test_attack_ramp_shape():
    atk = AttackSpec(onset_s=10.0, duration_s=20.0, amplitude=0.04)
    t = np.array([0.0, 10.0, 20.0, 30.0, 31.0])
    assert atk.ramp(t) == pytest.approx([0.0, 0.0, 0.02, 0.04, 0.0])


def test_rgb_trace_determinism_and_shape():
    spec = SubjectSpec(duration_s=10.0)
    a = gen_rgb_trace(spec, trace_noise_db=6.0)
    b = gen_rgb_trace(spec, trace_noise_db=6.0)
    assert_array_equal(a.r, b.r)
    assert_array_equal(a.b, b.b)
    assert a.r.size == int(10.0 * spec.fs_video)
    # pulse modulation depth is tiny relative to baseline
    assert np.max(np.abs(a.g / 120.0 - 1.0)) < 0.05


def test_motion_matrix_layout():
    spec = SubjectSpec(duration_s=40.0)
    m, truth = gen_motion_matrix(spec, n_signal_cols=5, noise_sigma=0.1)
    assert m.values.shape == (int(40 * spec.fs_video), 100)
    assert truth.window_s == 30.0
    # requested columns carry visibly more breathing power
    sig_var = m.values[:, :5].var(axis=0).min()
    noise_var = m.values[:, 5:].var(axis=0).max()
    assert sig_var > 5 * noise_var
    zero, _ = gen_motion_matrix(spec, n_signal_cols=0, noise_sigma=0.0)
    assert np.all(zero.values == 0.0)


def test_frame_sequence_renders_oscillation():
    spec = SubjectSpec(duration_s=31.0)
    frames, _ = gen_frame_sequence(spec, height=40, width=40, amp_px=2.0)
    assert frames.shape == (int(31 * spec.fs_video), 40, 40)
    assert frames.dtype == np.uint8
    # frames actually move
    assert np.any(frames[0] != frames[15])
    # determinism
    again, _ = gen_frame_sequence(spec, height=40, width=40, amp_px=2.0)
    assert_array_equal(frames, again)
