"""Affine view compensation of space-time filters.

Spatial coordinates follow ``x_s = (x1, x2)`` with x1 the horizontal
(column) index and x2 the vertical (row) index.  A view ``[A | b]`` maps an
output site ``x_s`` to the source site ``A @ x_s + b``; only space is
transformed, frames are warped independently.
"""
from dataclasses import dataclass, replace

import numpy as np

from .errors import InvertibilityError
from .volume import as_volume


@dataclass(frozen=True)
class AffineView:
    A: tuple = ((1.0, 0.0), (0.0, 1.0))
    b: tuple = (0.0, 0.0)

    def __post_init__(self):
        A = np.asarray(self.A, dtype=float)
        b = np.asarray(self.b, dtype=float)
        if A.shape != (2, 2) or b.shape != (2,):
            raise ValueError("A must be 2x2 and b a 2-vector")
        object.__setattr__(self, "A", tuple(map(tuple, A.tolist())))
        object.__setattr__(self, "b", tuple(b.tolist()))
        if abs(np.linalg.det(A)) < 1e-12:
            raise InvertibilityError(f"affine matrix {self.A} is singular")

    @property
    def matrix(self):
        return np.array(self.A)

    @property
    def offset(self):
        return np.array(self.b)

    @property
    def det(self):
        """|det A|."""
        return float(abs(np.linalg.det(self.matrix)))

    def then(self, other):
        """View equivalent to compensating by ``self`` and then by ``other``.

        Compensating twice samples H(A1 (A2 x + b2) + b1).
        """
        A = self.matrix @ other.matrix
        b = self.matrix @ other.offset + self.offset
        return AffineView(A, b)

    @classmethod
    def parse(cls, text):
        """Parse ``a11,a12,a21,a22,b1,b2``."""
        vals = [float(s) for s in text.split(",")]
        if len(vals) != 6:
            raise ValueError(f"expected 6 comma-separated values, got {len(vals)}")
        return cls(((vals[0], vals[1]), (vals[2], vals[3])), (vals[4], vals[5]))

    def format(self):
        (a11, a12), (a21, a22) = self.A
        return ",".join(repr(x) for x in (a11, a12, a21, a22, *self.b))

    @classmethod
    def shear(cls, angle_deg, center=(0.0, 0.0)):
        """Horizontal shear by ``angle_deg`` that leaves ``center`` (x1, x2) fixed."""
        A = np.array([[1.0, np.tan(np.radians(angle_deg))], [0.0, 1.0]])
        c = np.asarray(center, dtype=float)
        return cls(A, c - A @ c)


IDENTITY = AffineView()


def flip_view(cols):
    return AffineView(((-1.0, 0.0), (0.0, 1.0)), (cols - 1.0, 0.0))


def bilinear_sample(frame, x1, x2):
    """Sample ``frame[row, col]`` at real (col=x1, row=x2) sites, zero outside."""
    rows, cols = frame.shape
    c0 = np.floor(x1).astype(int)
    r0 = np.floor(x2).astype(int)
    fc = x1 - c0
    fr = x2 - r0
    out = np.zeros(np.shape(x1))
    for dr, wr in ((0, 1.0 - fr), (1, fr)):
        for dc, wc in ((0, 1.0 - fc), (1, fc)):
            r = r0 + dr
            c = c0 + dc
            w = wr * wc
            ok = (r >= 0) & (r < rows) & (c >= 0) & (c < cols) & (w != 0)
            out[ok] += w[ok] * frame[r[ok], c[ok]]
    return out


def warp_volume(volume, view):
    """out(x_s, t) = volume(A x_s + b, t) by inverse mapping, bilinear, zero fill."""
    v = as_volume(volume)
    rows, cols, _ = v.shape
    x2, x1 = np.meshgrid(np.arange(rows, dtype=float), np.arange(cols, dtype=float), indexing="ij")
    A, b = view.matrix, view.offset
    s1 = A[0, 0] * x1 + A[0, 1] * x2 + b[0]
    s2 = A[1, 0] * x1 + A[1, 1] * x2 + b[1]
    out = np.empty_like(v)
    for t in range(v.shape[2]):
        out[:, :, t] = bilinear_sample(v[:, :, t], s1, s2)
    return out


def compensate(f, view):
    """Compensated filter |det A|^2 H(A x_s + b, t) with alpha scaled by |det A|^2."""
    d2 = view.det**2
    return replace(
        f,
        volume=d2 * warp_volume(f.volume, view),
        alpha=f.alpha * d2,
        view_tag=("compensated", view),
    )


def flip_horizontal(f):
    """Reverse the columns of every frame."""
    tag = "type2" if f.view_tag == "type1" else f.view_tag
    return replace(f, volume=np.ascontiguousarray(f.volume[:, ::-1, :]), view_tag=tag)
