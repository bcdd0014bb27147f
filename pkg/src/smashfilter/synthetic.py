"""Synthetic translating-blob actions with known ground truth."""
from dataclasses import dataclass

import numpy as np

from .dataset import ClipSpec, Sample
from .view import warp_volume

ACTIONS = ("right", "left", "up")
VELOCITY = {"right": (0.0, 1.0), "left": (0.0, -1.0), "up": (-1.0, 0.0), "down": (1.0, 0.0)}


@dataclass
class SuiteConfig:
    field: int = 128
    frames: int = 16
    blob: int = 12
    speed: int = 2
    noise_std: float = 0.05
    instances: int = 10
    actions: tuple = ACTIONS
    # training clip: spatial window and number of raw frames (derivative adds one)
    clip_size: int = 32
    clip_frames: int = 9


def render_blob_video(action, start, cfg, rng):
    """Bright square blob moving at ``cfg.speed`` px/frame plus Gaussian noise."""
    v = np.zeros((cfg.field, cfg.field, cfg.frames))
    dr, dc = VELOCITY[action]
    centers = np.empty((cfg.frames, 2))
    for t in range(cfg.frames):
        top = int(start[0] + dr * cfg.speed * t)
        left = int(start[1] + dc * cfg.speed * t)
        v[top : top + cfg.blob, left : left + cfg.blob, t] = 1.0
        centers[t] = (top + (cfg.blob - 1) / 2, left + (cfg.blob - 1) / 2)
    if cfg.noise_std > 0:
        v += cfg.noise_std * rng.standard_normal(v.shape)
    return v, centers


def random_start(action, cfg, rng):
    travel = cfg.speed * (cfg.frames - 1)
    dr, dc = VELOCITY[action]
    # keep the clip-sized window around the blob inside the field
    margin = max(0, (cfg.clip_size - cfg.blob) // 2)
    lo = [margin, margin]
    hi = [cfg.field - cfg.blob - margin, cfg.field - cfg.blob - margin]
    for axis, d in enumerate((dr, dc)):
        if d > 0:
            hi[axis] -= travel
        elif d < 0:
            lo[axis] += travel
    return (int(rng.integers(lo[0], hi[0] + 1)), int(rng.integers(lo[1], hi[1] + 1)))


def make_suite(cfg=None, seed=0):
    cfg = cfg or SuiteConfig()
    rng = np.random.default_rng(seed)
    out = []
    for action in cfg.actions:
        for i in range(cfg.instances):
            start = random_start(action, cfg, rng)
            v, c = render_blob_video(action, start, cfg, rng)
            out.append(Sample(v, action, c, i))
    return out


def clip_spec(cfg):
    return ClipSpec(cfg.clip_size, cfg.clip_size, cfg.clip_frames)


def warp_sample(sample, view):
    """Warp every frame by ``view`` (out(x) = in(A x + b)); centres are mapped back."""
    v = warp_volume(sample.video, view)
    Ainv = np.linalg.inv(view.matrix)
    # centres stored (row, col); view acts on (col, row)
    xy = sample.centers[:, ::-1] - view.offset
    mapped = (Ainv @ xy.T).T[:, ::-1]
    return Sample(v, sample.label, mapped, sample.instance)
