"""Vertical motion features from raw frame sequences.

A deliberately simple block-matching estimator (not a dense optical flow):
the region of interest is split into a 10 x 10 cell grid, and for every
consecutive frame pair each cell's vertical displacement is the integer
shift (within +/- 8 px) maximizing the normalized cross-correlation against
the next frame, refined by a parabolic fit. Positive values mean downward
motion. Output is the (N-1) x 100 motion matrix the respiration pipeline
consumes.
"""

from __future__ import annotations

import numpy as np

from .errors import FrameSizeMismatchError, ValidationError
from .respiration import MotionMatrix

__all__ = ["motion_from_frames"]

GRID = 10
SEARCH_PX = 8


def _cell_sums(a: np.ndarray, gh: int, gw: int) -> np.ndarray:
    h, w = a.shape
    return a.reshape(GRID, gh, GRID, gw).sum(axis=(1, 3))


def motion_from_frames(
    frames: np.ndarray,
    bbox: tuple[int, int, int, int] | None = None,
    fs: float = 30.0,
    search_px: int = SEARCH_PX,
) -> MotionMatrix:
    """Per-cell vertical displacement between consecutive frames.

    ``bbox`` is (x0, y0, x1, y1) in pixels; the default leaves a vertical
    margin of ``search_px`` so the whole shift range stays on the raster.
    The crop is trimmed so both sides divide evenly into the 10-cell grid.
    Shifted candidates are sampled from the full frame and the search range
    shrinks near the image edges. Cells without texture report 0.
    """
    frames = np.asarray(frames, dtype=float)
    if frames.ndim != 3:
        raise FrameSizeMismatchError(f"expected (N, H, W) frames, got shape {frames.shape}")
    n, height, width = frames.shape
    if n < 2:
        raise ValidationError(f"need at least 2 frames, got {n}")
    if bbox is None:
        bbox = (0, search_px, width, max(height - search_px, search_px + 1))
    x0, y0, x1, y1 = (int(v) for v in bbox)
    if not (0 <= x0 < x1 <= width and 0 <= y0 < y1 <= height):
        raise ValidationError(f"bbox {bbox} outside the {width}x{height} raster")
    ch = (y1 - y0) // GRID  # cell height
    cw = (x1 - x0) // GRID
    if ch < 1 or cw < 1:
        raise ValidationError(f"bbox {bbox} too small for a {GRID}x{GRID} grid")
    hh = ch * GRID
    ww = cw * GRID
    n_px = ch * cw

    shifts = [
        dy for dy in range(-search_px, search_px + 1) if 0 <= y0 + dy and y0 + dy + hh <= height
    ]
    if len(shifts) < 3:
        raise ValidationError("search range does not fit inside the frame")
    shifts = np.array(shifts)
    zero_at = int(np.flatnonzero(shifts == 0)[0])

    out = np.empty((n - 1, GRID * GRID))
    for i in range(n - 1):
        tpl = frames[i, y0 : y0 + hh, x0 : x0 + ww]
        st = _cell_sums(tpl, ch, cw)
        stt = _cell_sums(tpl * tpl, ch, cw)
        var_t = stt - st * st / n_px

        r = np.full((shifts.size, GRID, GRID), -np.inf)
        for si, dy in enumerate(shifts):
            cand = frames[i + 1, y0 + dy : y0 + dy + hh, x0 : x0 + ww]
            sc = _cell_sums(cand, ch, cw)
            scc = _cell_sums(cand * cand, ch, cw)
            stc = _cell_sums(tpl * cand, ch, cw)
            var_c = scc - sc * sc / n_px
            den = var_t * var_c
            good = den > 0
            cov = stc - st * sc / n_px
            r[si][good] = cov[good] / np.sqrt(den[good])

        flat_cells = ~np.isfinite(r).any(axis=0)
        peak = np.argmax(r, axis=0)
        gi, gj = np.meshgrid(np.arange(GRID), np.arange(GRID), indexing="ij")
        disp = shifts[peak].astype(float)

        interior = (peak > 0) & (peak < shifts.size - 1)
        pk = np.where(interior, peak, 1)
        r0 = r[pk, gi, gj]
        rm = r[pk - 1, gi, gj]
        rp = r[pk + 1, gi, gj]
        # flat cells hold -inf correlations; their delta is masked below
        with np.errstate(divide="ignore", invalid="ignore"):
            denom = rm - 2.0 * r0 + rp
            delta = 0.5 * (rm - rp) / denom
        delta = np.where(np.isfinite(delta), np.clip(delta, -1.0, 1.0), 0.0)
        # an exact match needs no refinement (and its neighbors may be asymmetric)
        refine = interior & (r0 < 1.0 - 1e-9)
        disp += np.where(refine, delta, 0.0)
        disp[flat_cells] = 0.0
        out[i] = disp.ravel()

    return MotionMatrix(out, fs, 0.0)
