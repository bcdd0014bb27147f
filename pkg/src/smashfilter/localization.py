"""Per-frame action localization from a response volume.

Boxes are reported in video-frame coordinates.  Response offset (l, m)
places the filter's top-left corner at pixel (l, m), so the box centre is
the peak offset plus the filter's centre, ``((L-1)//2, (M-1)//2)``.
"""
import math
from dataclasses import dataclass

import numpy as np

from .errors import AlignmentError, DimensionError

GAMMA_GRID = tuple(round(1.0 - 0.01 * i, 2) for i in range(100))  # 1.00 .. 0.01
CDF_THRESHOLDS = (5, 10, 15, 20, 25)
MASS_SLACK = 1e-12


@dataclass(frozen=True)
class BoundingBox:
    frame_index: int
    center: tuple  # (row, col) in video pixels
    height: int
    width: int
    mass_fraction: float
    degenerate: bool = False
    gamma: float = 1.0

    @property
    def corners(self):
        """(top, left, bottom, right), bottom/right exclusive."""
        r, c = self.center
        top = r - (self.height - 1) // 2
        left = c - (self.width - 1) // 2
        return top, left, top + self.height, left + self.width


def _centered_span(center, size, limit):
    lo = center - (size - 1) // 2
    return max(0, lo), min(limit, lo + size)


def _clip_box(frame_index, center, h, w, frame_shape, mass, degenerate, gamma):
    rows, cols = frame_shape
    r0, r1 = _centered_span(center[0], h, rows)
    c0, c1 = _centered_span(center[1], w, cols)
    # keep the centre, shrink the extent to what remains inside the frame
    return BoundingBox(frame_index, center, r1 - r0, c1 - c0, mass, degenerate, gamma)


def _density(slice_, peak, L, M):
    """Filter-sized window around ``peak`` shifted non-negative and normalized to sum 1."""
    rows, cols = slice_.shape
    r0, r1 = _centered_span(peak[0], L, rows)
    c0, c1 = _centered_span(peak[1], M, cols)
    win = slice_[r0:r1, c0:c1].astype(float)
    lo = win.min()
    if lo < 0:
        win = win - lo
    total = win.sum()
    if total <= 0:
        win = np.ones_like(win)
        total = win.sum()
    dens = np.zeros_like(slice_, dtype=float)
    dens[r0:r1, c0:c1] = win / total
    return dens


def centered_mass(dens, peak, h, w):
    r0, r1 = _centered_span(peak[0], h, dens.shape[0])
    c0, c1 = _centered_span(peak[1], w, dens.shape[1])
    return float(dens[r0:r1, c0:c1].sum())


def locate_frame(r, frame_offset, filter_dims, lam=0.7, mode="mass"):
    """Bounding box for response frame ``frame_offset``.

    ``mode="mass"`` scans box sizes from filter size downwards and keeps the
    first one (filter aspect, centred on the peak) holding at most ``lam``
    of the normalized response mass.
    ``mode="fixed"`` returns the filter-sized box placed at the peak.
    """
    if not 0 < lam <= 1:
        raise ValueError("lambda must be in (0, 1]")
    data = np.asarray(getattr(r, "data", r), dtype=float)
    if not 0 <= frame_offset < data.shape[2]:
        raise DimensionError(f"frame offset {frame_offset} outside response with {data.shape[2]} frames")
    L, M = int(filter_dims[0]), int(filter_dims[1])
    frame_shape = (data.shape[0] + L - 1, data.shape[1] + M - 1)
    slice_ = data[:, :, frame_offset]
    peak = np.unravel_index(np.argmax(slice_), slice_.shape)
    center = (int(peak[0]) + (L - 1) // 2, int(peak[1]) + (M - 1) // 2)
    if mode == "fixed":
        return _clip_box(frame_offset, center, L, M, frame_shape, 1.0, False, 1.0)
    if mode != "mass":
        raise ValueError(f"unknown box mode {mode!r}")
    dens = _density(slice_, peak, L, M)
    for g in GAMMA_GRID:
        h, w = math.ceil(g * L - 1e-9), math.ceil(g * M - 1e-9)
        mass = centered_mass(dens, peak, h, w)
        if mass <= lam + MASS_SLACK:
            return _clip_box(frame_offset, center, h, w, frame_shape, mass, False, g)
    return _clip_box(frame_offset, center, 1, 1, frame_shape, centered_mass(dens, peak, 1, 1), True, GAMMA_GRID[-1])


def locate_video(r, filter_dims, lam=0.7, mode="mass"):
    data = np.asarray(getattr(r, "data", r))
    return [locate_frame(data, n, filter_dims, lam, mode) for n in range(data.shape[2])]


def center_error(boxes, truth_centers):
    """Per-frame Euclidean centre displacement and its CDF at 5..25 px."""
    truth = np.asarray(truth_centers, dtype=float).reshape(-1, 2)
    if len(boxes) != len(truth):
        raise AlignmentError(f"{len(boxes)} boxes but {len(truth)} ground-truth centres")
    centers = np.array([b.center for b in boxes], dtype=float).reshape(-1, 2)
    disp = np.sqrt(np.sum((centers - truth) ** 2, axis=1))
    cdf = {d: float(np.mean(disp <= d)) if len(disp) else 1.0 for d in CDF_THRESHOLDS}
    return disp, cdf
