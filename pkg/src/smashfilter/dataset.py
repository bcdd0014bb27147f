"""Labelled videos with per-frame subject centres, and training-clip extraction.

A corpus on disk is laid out as ``ROOT/<action>/<video>/`` holding binary
PGM frames and a ``centers.csv`` with columns ``frame,row,col``.
"""
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from .codecs import read_csv, read_pgm_sequence
from .errors import FormatError


@dataclass
class Sample:
    video: np.ndarray
    label: str
    centers: np.ndarray  # (frames, 2) subject centre (row, col) per raw frame
    instance: object = 0


@dataclass(frozen=True)
class ClipSpec:
    """Training clip size: rows x cols spatially, ``frames`` raw frames (filter gets frames-1)."""

    rows: int = 32
    cols: int = 32
    frames: int = 9


def clip_window(sample, clip):
    """(row0, col0, t0) of the clip centred on the subject at mid-clip time."""
    P, Q, R = sample.video.shape
    if clip.rows > P or clip.cols > Q or clip.frames > R:
        raise FormatError(f"clip {clip} larger than video {sample.video.shape}")
    t0 = (R - clip.frames) // 2
    mid = sample.centers[t0 + clip.frames // 2]
    r0 = int(np.clip(round(mid[0] - (clip.rows - 1) / 2), 0, P - clip.rows))
    c0 = int(np.clip(round(mid[1] - (clip.cols - 1) / 2), 0, Q - clip.cols))
    return r0, c0, t0


def training_clip(sample, clip):
    r0, c0, t0 = clip_window(sample, clip)
    return sample.video[r0 : r0 + clip.rows, c0 : c0 + clip.cols, t0 : t0 + clip.frames]


def response_truth_centers(sample, filter_frames):
    """Subject centre for each response frame n: raw frame n + N//2 (middle of n..n+N)."""
    R = sample.centers.shape[0]
    n_resp = R - filter_frames
    return np.array([sample.centers[n + filter_frames // 2] for n in range(n_resp)])


def read_centers(path, frames):
    _, rows = read_csv(path)
    centers = np.full((frames, 2), np.nan)
    for r in rows:
        t = int(r[0])
        if 0 <= t < frames:
            centers[t] = (float(r[1]), float(r[2]))
    if np.isnan(centers).any():
        # carry annotations over unannotated frames
        idx = np.arange(frames)
        for k in range(2):
            known = ~np.isnan(centers[:, k])
            if not known.any():
                raise FormatError(f"{path}: no usable annotations")
            centers[:, k] = np.interp(idx, idx[known], centers[known, k])
    return centers


def load_corpus(root):
    root = Path(root)
    samples = []
    for action_dir in sorted(p for p in root.iterdir() if p.is_dir()):
        for video_dir in sorted(p for p in action_dir.iterdir() if p.is_dir()):
            v = read_pgm_sequence(video_dir)
            centers_path = video_dir / "centers.csv"
            if centers_path.exists():
                c = read_centers(centers_path, v.shape[2])
            else:
                c = np.tile([(v.shape[0] - 1) / 2, (v.shape[1] - 1) / 2], (v.shape[2], 1))
            samples.append(Sample(v, action_dir.name, c, video_dir.name))
    if not samples:
        raise FormatError(f"{root}: no <action>/<video>/ directories found")
    return samples
