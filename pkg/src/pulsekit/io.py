"""File formats: signal/trace/motion CSVs, rate and lag CSVs, JSON
manifests, and raw frame directories.

All CSV files carry a time column ``t`` in seconds that must be strictly
increasing and uniformly spaced within 1e-6 relative tolerance; the
sampling rate is inferred from the median step.
"""

from __future__ import annotations

import json
import re
from pathlib import Path

import numpy as np

from .core import HrSeries, LagSeries, TimeSeries
from .errors import FrameSizeMismatchError, ValidationError
from .respiration import MOTION_CELLS, MotionMatrix
from .rppg import RgbTrace

__all__ = [
    "write_timeseries_csv",
    "read_timeseries_csv",
    "write_rgb_csv",
    "read_rgb_csv",
    "write_motion_csv",
    "read_motion_csv",
    "write_hr_csv",
    "read_hr_csv",
    "write_lag_csv",
    "read_lag_csv",
    "read_frames_dir",
    "load_manifest",
]

_FLOAT_FMT = "%.12g"


def _read_table(path: Path, expect_cols: int | None = None) -> tuple[list[str], np.ndarray]:
    path = Path(path)
    if not path.exists():
        raise ValidationError(f"file not found: {path}")
    with open(path) as fh:
        header = fh.readline().strip()
        body = fh.read()
    names = [c.strip() for c in header.split(",")]
    if body.strip():
        data = np.loadtxt(body.splitlines(), delimiter=",", ndmin=2)
    else:
        # header-only file: a rate series where every window was gated out
        data = np.empty((0, len(names)))
    if data.shape[1] != len(names):
        raise ValidationError(f"{path}: header has {len(names)} columns, data {data.shape[1]}")
    if expect_cols is not None and data.shape[1] != expect_cols:
        raise ValidationError(f"{path}: expected {expect_cols} columns, got {data.shape[1]}")
    return names, data


def _infer_fs(t: np.ndarray, path: Path) -> float:
    if t.size < 2:
        raise ValidationError(f"{path}: need at least 2 samples to infer a rate")
    dt = np.diff(t)
    if np.any(dt <= 0):
        raise ValidationError(f"{path}: time column must be strictly increasing")
    med = float(np.median(dt))
    if np.max(np.abs(dt - med)) > 1e-6 * med:
        raise ValidationError(f"{path}: time column is not uniformly spaced")
    return 1.0 / med


def _write_table(path: Path, header: list[str], columns: list[np.ndarray]) -> None:
    arr = np.column_stack(columns)
    np.savetxt(path, arr, fmt=_FLOAT_FMT, delimiter=",", header=",".join(header), comments="")


def write_timeseries_csv(path, ts: TimeSeries, name: str) -> None:
    _write_table(Path(path), ["t", name], [ts.times(), ts.values])


def read_timeseries_csv(path) -> tuple[str, TimeSeries]:
    path = Path(path)
    names, data = _read_table(path, expect_cols=2)
    fs = _infer_fs(data[:, 0], path)
    return names[1], TimeSeries(data[:, 1], fs, float(data[0, 0]))


def write_rgb_csv(path, trace: RgbTrace) -> None:
    t = trace.t0 + np.arange(len(trace)) / trace.fs
    _write_table(Path(path), ["t", "r", "g", "b"], [t, trace.r, trace.g, trace.b])


def read_rgb_csv(path) -> RgbTrace:
    path = Path(path)
    names, data = _read_table(path, expect_cols=4)
    if [n.lower() for n in names[1:]] != ["r", "g", "b"]:
        raise ValidationError(f"{path}: expected header t,r,g,b")
    fs = _infer_fs(data[:, 0], path)
    return RgbTrace(data[:, 1], data[:, 2], data[:, 3], fs, float(data[0, 0]))


def write_motion_csv(path, m: MotionMatrix) -> None:
    t = m.t0 + np.arange(m.n_frames) / m.fs
    header = ["t"] + [f"c{i:02d}" for i in range(MOTION_CELLS)]
    _write_table(Path(path), header, [t] + [m.values[:, i] for i in range(MOTION_CELLS)])


def read_motion_csv(path) -> MotionMatrix:
    path = Path(path)
    names, data = _read_table(path, expect_cols=MOTION_CELLS + 1)
    fs = _infer_fs(data[:, 0], path)
    return MotionMatrix(data[:, 1:], fs, float(data[0, 0]))


def write_hr_csv(path, hr: HrSeries) -> None:
    _write_table(Path(path), ["t", "hr_bpm"], [hr.t, hr.bpm])


def read_hr_csv(path) -> HrSeries:
    path = Path(path)
    _, data = _read_table(path, expect_cols=2)
    return HrSeries(data[:, 0], data[:, 1])


def write_lag_csv(path, series: LagSeries) -> None:
    _write_table(
        Path(path), ["center_s", "lag_ms", "peak_r"], [series.t, series.lag_ms, series.peak_r]
    )


def read_lag_csv(path) -> LagSeries:
    path = Path(path)
    _, data = _read_table(path, expect_cols=3)
    return LagSeries(data[:, 0], data[:, 1], data[:, 2])


_FRAME_PATTERN = re.compile(r"\.(pgm|ppm|pbm|pnm)$", re.IGNORECASE)


def read_frames_dir(path) -> np.ndarray:
    """Load a directory of portable pixmap frames (P2/P3/P5/P6) as grayscale.

    Files are taken in sorted name order; RGB frames are converted to
    luminance. Returns float array (N, H, W).
    """
    from PIL import Image

    path = Path(path)
    if not path.is_dir():
        raise ValidationError(f"frame directory not found: {path}")
    files = sorted(p for p in path.iterdir() if _FRAME_PATTERN.search(p.name))
    if len(files) < 2:
        raise ValidationError(f"{path}: need at least 2 frames, found {len(files)}")
    frames = []
    shape = None
    for f in files:
        img = Image.open(f).convert("L")
        arr = np.asarray(img, dtype=float)
        if shape is None:
            shape = arr.shape
        elif arr.shape != shape:
            raise FrameSizeMismatchError(
                f"{f.name} is {arr.shape}, first frame was {shape}"
            )
        frames.append(arr)
    return np.stack(frames)


def write_frames_dir(path, frames: np.ndarray) -> None:
    """Write grayscale uint8 frames as binary PGM (P5) files."""
    from PIL import Image

    path = Path(path)
    path.mkdir(parents=True, exist_ok=True)
    for i, frame in enumerate(np.asarray(frames, dtype=np.uint8)):
        Image.fromarray(frame, mode="L").save(path / f"frame_{i:06d}.pgm")


def load_manifest(path) -> dict:
    """Load and validate a manifest JSON; file references must exist."""
    path = Path(path)
    if not path.exists():
        raise ValidationError(f"manifest not found: {path}")
    try:
        with open(path) as fh:
            manifest = json.load(fh)
    except json.JSONDecodeError as exc:
        raise ValidationError(f"{path}: invalid JSON ({exc})") from exc
    if not isinstance(manifest, dict):
        raise ValidationError(f"{path}: manifest must be a JSON object")
    base = path.parent

    def _check_file(p: str, key: str) -> str:
        full = base / p
        if not full.exists():
            raise ValidationError(f"{path}: {key} references missing file {full}")
        return str(full)

    for key in ("guide", "truth_hr", "truth_resp", "motion"):
        if key in manifest:
            manifest[key] = _check_file(manifest[key], key)
    for key in ("channels", "rgb"):
        if key in manifest:
            if not isinstance(manifest[key], dict):
                raise ValidationError(f"{path}: {key} must map names to files")
            manifest[key] = {
                name: _check_file(p, f"{key}.{name}") for name, p in manifest[key].items()
            }
    if "frames_dir" in manifest:
        full = base / manifest["frames_dir"]
        if not full.is_dir():
            raise ValidationError(f"{path}: frames_dir references missing directory {full}")
        manifest["frames_dir"] = str(full)
    return manifest
