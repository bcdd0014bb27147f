"""Dense spatio-temporal volumes, 3D DFT and valid-region correlation.

A video volume is a float64 ndarray of shape ``(P, Q, R)``: rows, columns,
frames.  Frames are flattened to vectors column by column (Fortran order),
i.e. by stacking the Q columns of the frame.
"""
from dataclasses import dataclass

import numpy as np

from .errors import (
    ConjugateSymmetryError,
    DimensionError,
    InsufficientFramesError,
    SizingError,
)

MAX_ELEMENTS = 2**31 - 1
IMAG_TOLERANCE = 1e-6


def as_volume(data, name="volume"):
    """Validate and return ``data`` as a float64 (P, Q, R) array."""
    v = np.asarray(data, dtype=np.float64)
    if v.ndim == 2:
        v = v[:, :, None]
    if v.ndim != 3:
        raise DimensionError(f"{name} must be 3-D (rows, cols, frames), got shape {v.shape}")
    if min(v.shape) < 1:
        raise DimensionError(f"{name} has an empty axis: {v.shape}")
    if v.size > MAX_ELEMENTS:
        raise SizingError(f"{name} has {v.size} elements, more than {MAX_ELEMENTS}")
    if not np.all(np.isfinite(v)):
        raise DimensionError(f"{name} contains non-finite values")
    return v


def flatten_frame(frame):
    return np.asarray(frame).reshape(-1, order="F")


def unflatten_frame(vec, rows, cols):
    return np.asarray(vec).reshape((rows, cols), order="F")


def frames_to_matrix(v):
    """Stack every frame of ``v`` as one column of a (P*Q, R) matrix."""
    P, Q, R = v.shape
    return v.reshape((P * Q, R), order="F")


def matrix_to_frames(m, rows, cols):
    return np.asarray(m).reshape((rows, cols, -1), order="F")


def dft3(v):
    """Unnormalized forward 3D DFT (negative exponent)."""
    v = as_volume(v)
    return np.fft.fftn(v)


def idft3(spectrum, tol=IMAG_TOLERANCE):
    """Inverse of :func:`dft3`, returning the real part.

    Raises ConjugateSymmetryError when the imaginary residue exceeds ``tol``
    relative to the real part, which means the spectrum did not come from a
    real volume.
    """
    s = np.asarray(spectrum, dtype=np.complex128)
    if s.ndim != 3:
        raise DimensionError(f"spectrum must be 3-D, got shape {s.shape}")
    out = np.fft.ifftn(s)
    scale = max(np.abs(out.real).max(), np.finfo(float).tiny)
    residue = np.abs(out.imag).max() / scale
    if residue > tol:
        raise ConjugateSymmetryError(f"imaginary residue {residue:.3e} exceeds {tol:.1e}")
    return np.ascontiguousarray(out.real)


def imag_residue(spectrum):
    """Relative size of the imaginary part left after inverting ``spectrum``."""
    out = np.fft.ifftn(np.asarray(spectrum, dtype=np.complex128))
    scale = max(np.abs(out.real).max(), np.finfo(float).tiny)
    return float(np.abs(out.imag).max() / scale)


@dataclass(frozen=True)
class ResponseVolume:
    """Correlation response c(l, m, n) over valid offsets."""

    data: np.ndarray
    provenance: str = "oracle"

    @property
    def shape(self):
        return self.data.shape


def response_shape(video_shape, filter_shape):
    out = tuple(a - b + 1 for a, b in zip(video_shape, filter_shape))
    if min(out) < 1:
        raise DimensionError(
            f"filter {tuple(filter_shape)} does not fit inside video {tuple(video_shape)}"
        )
    return out


AXES = (0, 1, 2)


def _valid_correlation(F_video, video_shape, filt, provenance):
    out = response_shape(video_shape, filt.shape)
    F_filt = np.fft.rfftn(filt, s=video_shape, axes=AXES)
    full = np.fft.irfftn(F_video * np.conj(F_filt), s=video_shape, axes=AXES)
    return ResponseVolume(np.ascontiguousarray(full[: out[0], : out[1], : out[2]]), provenance)


def correlate3(video, filt, provenance="oracle"):
    """Valid-region spatio-temporal cross-correlation via FFT.

    ``c[l, m, n] = sum_{x,y,t} video[l+x, m+y, n+t] * filt[x, y, t]`` for
    every offset at which the filter lies fully inside the video.  Both
    operands are zero-padded to the video size, so the circular product
    never wraps inside the valid region.
    """
    return correlate3_many(video, [filt], provenance)[0]


def correlate3_many(video, filters, provenance="oracle"):
    """correlate3 against several filters, transforming the video once."""
    video = as_volume(video, "video")
    filters = [as_volume(f, "filter") for f in filters]
    for f in filters:
        response_shape(video.shape, f.shape)
    F_video = np.fft.rfftn(video)
    return [_valid_correlation(F_video, video.shape, f, provenance) for f in filters]


def temporal_derivative(v):
    """Forward difference along time; drops the last frame."""
    v = as_volume(v)
    if v.shape[2] < 2:
        raise InsufficientFramesError(f"temporal derivative needs >= 2 frames, got {v.shape[2]}")
    return v[:, :, 1:] - v[:, :, :-1]
