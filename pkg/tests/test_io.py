"""CSV / frame-directory / manifest round trips and their validation errors."""

import json

import numpy as np
import pytest

from pulsekit.core import HrSeries, LagSeries, TimeSeries
from pulsekit.errors import FrameSizeMismatchError, ValidationError
from pulsekit.io import (
    load_manifest,
    read_frames_dir,
    read_hr_csv,
    read_lag_csv,
    read_motion_csv,
    read_rgb_csv,
    read_timeseries_csv,
    write_frames_dir,
    write_hr_csv,
    write_lag_csv,
    write_motion_csv,
    write_rgb_csv,
    write_timeseries_csv,
)
from pulsekit.respiration import MotionMatrix
from pulsekit.rppg import RgbTrace


def test_timeseries_roundtrip(tmp_path):
    rng = np.random.default_rng(0)
    ts = TimeSeries(rng.normal(size=500), 97.0, t0=2.25)
    p = tmp_path / "wave.csv"
    write_timeseries_csv(p, ts, "ppg_face")
    name, back = read_timeseries_csv(p)
    assert name == "ppg_face"
    assert back.fs == pytest.approx(ts.fs, rel=1e-9)
    assert back.t0 == pytest.approx(ts.t0, rel=1e-9)
    # %.12g keeps ~12 significant digits
    np.testing.assert_allclose(back.values, ts.values, rtol=1e-10, atol=1e-12)


def test_rgb_roundtrip(tmp_path):
    rng = np.random.default_rng(1)
    trace = RgbTrace(
        170 + rng.normal(size=90),
        120 + rng.normal(size=90),
        95 + rng.normal(size=90),
        fs=30.0,
        t0=0.0,
    )
    p = tmp_path / "trace.csv"
    write_rgb_csv(p, trace)
    back = read_rgb_csv(p)
    assert back.fs == pytest.approx(30.0)
    np.testing.assert_allclose(back.r, trace.r, rtol=1e-10)
    np.testing.assert_allclose(back.g, trace.g, rtol=1e-10)
    np.testing.assert_allclose(back.b, trace.b, rtol=1e-10)


def test_rgb_header_checked(tmp_path):
    p = tmp_path / "bad.csv"
    p.write_text("t,x,y,z\n0,1,2,3\n0.1,1,2,3\n")
    with pytest.raises(ValidationError, match="expected header t,r,g,b"):
        read_rgb_csv(p)


def test_motion_roundtrip(tmp_path):
    rng = np.random.default_rng(2)
    m = MotionMatrix(rng.normal(size=(120, 100)), 30.0, t0=1.0)
    p = tmp_path / "motion.csv"
    write_motion_csv(p, m)
    back = read_motion_csv(p)
    assert back.fs == pytest.approx(30.0)
    assert back.t0 == pytest.approx(1.0)
    np.testing.assert_allclose(back.values, m.values, rtol=1e-10, atol=1e-12)


def test_motion_column_count_enforced(tmp_path):
    p = tmp_path / "narrow.csv"
    p.write_text("t,c00,c01\n0,1,2\n0.1,1,2\n")
    with pytest.raises(ValidationError, match="expected 101 columns"):
        read_motion_csv(p)


def test_hr_roundtrip(tmp_path):
    hr = HrSeries(np.array([5.0, 6.0, 7.0]), np.array([71.5, 72.0, 72.25]))
    p = tmp_path / "hr.csv"
    write_hr_csv(p, hr)
    back = read_hr_csv(p)
    np.testing.assert_allclose(back.t, hr.t, rtol=1e-12)
    np.testing.assert_allclose(back.bpm, hr.bpm, rtol=1e-12)


def test_empty_hr_roundtrip(tmp_path):
    # a fully gated rate series writes a header-only file; it must read back
    hr = HrSeries(np.empty(0), np.empty(0))
    p = tmp_path / "empty.csv"
    write_hr_csv(p, hr)
    back = read_hr_csv(p)
    assert back.t.size == 0
    assert back.bpm.size == 0


def test_lag_roundtrip(tmp_path):
    series = LagSeries(
        np.array([2.5, 2.51, 2.52]),
        np.array([49.7, 50.2, -12.0]),
        np.array([0.98, 0.97, 0.41]),
    )
    p = tmp_path / "lag.csv"
    write_lag_csv(p, series)
    back = read_lag_csv(p)
    np.testing.assert_allclose(back.t, series.t, rtol=1e-12)
    np.testing.assert_allclose(back.lag_ms, series.lag_ms, rtol=1e-12)
    np.testing.assert_allclose(back.peak_r, series.peak_r, rtol=1e-12)


def test_missing_file_names_path(tmp_path):
    missing = tmp_path / "nope.csv"
    with pytest.raises(ValidationError, match="nope.csv"):
        read_timeseries_csv(missing)


def test_header_data_mismatch(tmp_path):
    p = tmp_path / "mismatch.csv"
    p.write_text("t,a,b\n0,1\n0.1,2\n")
    with pytest.raises(ValidationError, match="header has 3 columns"):
        read_timeseries_csv(p)


def test_time_column_must_increase(tmp_path):
    p = tmp_path / "backwards.csv"
    p.write_text("t,x\n0,1\n0.1,2\n0.05,3\n")
    with pytest.raises(ValidationError, match="strictly increasing"):
        read_timeseries_csv(p)


def test_time_column_must_be_uniform(tmp_path):
    p = tmp_path / "jittery.csv"
    p.write_text("t,x\n0,1\n0.1,2\n0.25,3\n0.35,4\n")
    with pytest.raises(ValidationError, match="not uniformly spaced"):
        read_timeseries_csv(p)


def test_frames_roundtrip(tmp_path):
    rng = np.random.default_rng(3)
    frames = rng.integers(0, 256, size=(5, 24, 32), dtype=np.uint8)
    d = tmp_path / "frames"
    write_frames_dir(d, frames)
    back = read_frames_dir(d)
    assert back.shape == (5, 24, 32)
    assert back.dtype == float
    np.testing.assert_array_equal(back, frames.astype(float))


def test_frames_dir_missing(tmp_path):
    with pytest.raises(ValidationError, match="frame directory not found"):
        read_frames_dir(tmp_path / "absent")


def test_frames_dir_needs_two(tmp_path):
    d = tmp_path / "one"
    write_frames_dir(d, np.zeros((1, 8, 8), dtype=np.uint8))
    with pytest.raises(ValidationError, match="need at least 2 frames, found 1"):
        read_frames_dir(d)


def test_frames_size_mismatch_names_offender(tmp_path):
    from PIL import Image

    d = tmp_path / "mixed"
    d.mkdir()
    Image.fromarray(np.zeros((10, 10), dtype=np.uint8), mode="L").save(d / "a.pgm")
    Image.fromarray(np.zeros((12, 10), dtype=np.uint8), mode="L").save(d / "b.pgm")
    with pytest.raises(FrameSizeMismatchError, match="b.pgm"):
        read_frames_dir(d)


def test_frames_ignore_other_extensions(tmp_path):
    d = tmp_path / "noise"
    write_frames_dir(d, np.zeros((2, 8, 8), dtype=np.uint8))
    (d / "notes.txt").write_text("not a frame")
    assert read_frames_dir(d).shape == (2, 8, 8)


def test_manifest_resolves_relative_paths(tmp_path):
    ts = TimeSeries(np.arange(10.0), 10.0, t0=0.0)
    write_timeseries_csv(tmp_path / "face.csv", ts, "face")
    write_hr_csv(tmp_path / "guide.csv", HrSeries(np.array([0.0, 1.0]), np.array([70.0, 71.0])))
    (tmp_path / "frames").mkdir()
    manifest = {
        "fs": 400,
        "channels": {"face": "face.csv"},
        "guide": "guide.csv",
        "frames_dir": "frames",
    }
    p = tmp_path / "subject.json"
    p.write_text(json.dumps(manifest))
    loaded = load_manifest(p)
    assert loaded["channels"]["face"] == str(tmp_path / "face.csv")
    assert loaded["guide"] == str(tmp_path / "guide.csv")
    assert loaded["frames_dir"] == str(tmp_path / "frames")
    assert loaded["fs"] == 400  # untouched keys pass through


def test_manifest_missing_reference_names_path(tmp_path):
    p = tmp_path / "subject.json"
    p.write_text(json.dumps({"guide": "gone.csv"}))
    with pytest.raises(ValidationError, match="gone.csv"):
        load_manifest(p)


def test_manifest_missing_channel_entry(tmp_path):
    p = tmp_path / "subject.json"
    p.write_text(json.dumps({"channels": {"arm": "arm.csv"}}))
    with pytest.raises(ValidationError, match="channels.arm references missing file"):
        load_manifest(p)


def test_manifest_channels_must_be_mapping(tmp_path):
    p = tmp_path / "subject.json"
    p.write_text(json.dumps({"channels": ["face.csv"]}))
    with pytest.raises(ValidationError, match="must map names to files"):
        load_manifest(p)


def test_manifest_invalid_json(tmp_path):
    p = tmp_path / "subject.json"
    p.write_text("{not json")
    with pytest.raises(ValidationError, match="invalid JSON"):
        load_manifest(p)


def test_manifest_must_be_object(tmp_path):
    p = tmp_path / "subject.json"
    p.write_text("[1, 2, 3]")
    with pytest.raises(ValidationError, match="must be a JSON object"):
        load_manifest(p)


def test_manifest_not_found(tmp_path):
    with pytest.raises(ValidationError, match="manifest not found"):
        load_manifest(tmp_path / "subject.json")
