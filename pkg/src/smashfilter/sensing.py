"""Compressive-camera simulation: measurement matrices, projection, JL checks.

Random entries come from a SplitMix64 stream so that any implementation
regenerates the same matrix from ``(distribution, seed, K, D)``.  Row ``r``
uses its own stream seeded with ``mix(seed ^ r)``, which keeps generation
independent of how rows are scheduled.
"""
from dataclasses import dataclass, field, replace
from functools import cached_property

import numpy as np

from .errors import DimensionError, InsufficientFramesError, OrderError, RankError
from .volume import as_volume, frames_to_matrix, matrix_to_frames

GOLDEN_GAMMA = np.uint64(0x9E3779B97F4A7C15)
MIX_MUL1 = np.uint64(0xBF58476D1CE4E5B9)
MIX_MUL2 = np.uint64(0x94D049BB133111EB)
MASK64 = (1 << 64) - 1

DISTRIBUTIONS = ("gaussian", "bernoulli")
# sub-seed stream index for measurement noise; well above any realistic row index
NOISE_STREAM = 1 << 62


def mix64(z):
    """SplitMix64 finalizer on a uint64 array (wrapping arithmetic)."""
    z = np.asarray(z, dtype=np.uint64)
    z = (z ^ (z >> np.uint64(30))) * MIX_MUL1
    z = (z ^ (z >> np.uint64(27))) * MIX_MUL2
    return z ^ (z >> np.uint64(31))


def splitmix64_draws(seed, count):
    """First ``count`` outputs of a SplitMix64 generator whose state starts at ``seed``."""
    steps = np.arange(1, count + 1, dtype=np.uint64)
    with np.errstate(over="ignore"):
        state = np.uint64(seed & MASK64) + steps * GOLDEN_GAMMA
        return mix64(state)


def sub_seed(seed, index):
    return int(mix64(np.array([(seed ^ index) & MASK64], dtype=np.uint64))[0])


def uniforms(draws):
    """Map 64-bit draws to doubles in [0, 1) using the top 53 bits."""
    return (draws >> np.uint64(11)).astype(np.float64) * 2.0**-53


def gaussian_stream(seed, count):
    """Box-Muller normals: cosine value first, then sine, pair by pair."""
    pairs = (count + 1) // 2
    u = uniforms(splitmix64_draws(seed, 2 * pairs))
    u1, u2 = u[0::2], u[1::2]
    # u1 == 0 has probability 2**-53; clamp to keep the log finite
    u1 = np.where(u1 > 0.0, u1, 2.0**-53)
    radius = np.sqrt(-2.0 * np.log(u1))
    angle = 2.0 * np.pi * u2
    out = np.empty(2 * pairs)
    out[0::2] = radius * np.cos(angle)
    out[1::2] = radius * np.sin(angle)
    return out[:count]


def bernoulli_stream(seed, count):
    """+1 when the top bit of the draw is clear, -1 when it is set."""
    top = splitmix64_draws(seed, count) >> np.uint64(63)
    return 1.0 - 2.0 * top.astype(np.float64)


def _row(distribution, seed, r, D):
    s = sub_seed(seed, r)
    if distribution == "gaussian":
        return gaussian_stream(s, D)
    return bernoulli_stream(s, D)


@dataclass(frozen=True)
class MeasurementMatrix:
    """K x D random projection with entries scaled by 1/sqrt(K)."""

    distribution: str
    seed: int
    K: int
    D: int

    def __post_init__(self):
        if self.distribution not in DISTRIBUTIONS:
            raise ValueError(f"unknown distribution {self.distribution!r}")
        if self.K < 1 or self.D < 1:
            raise DimensionError(f"matrix dims must be positive, got K={self.K}, D={self.D}")
        if self.K > self.D:
            raise RankError(f"K={self.K} measurements exceed D={self.D} pixels")
        if not 0 <= self.seed <= MASK64:
            raise ValueError("seed must fit in 64 unsigned bits")

    @property
    def scale(self):
        return 1.0 / np.sqrt(self.K)

    @cached_property
    def entries(self):
        phi = np.empty((self.K, self.D))
        for r in range(self.K):
            phi[r] = _row(self.distribution, self.seed, r, self.D)
        phi *= self.scale
        phi.setflags(write=False)
        return phi

    def identity(self):
        return (self.distribution, self.seed, self.K, self.D)


def make_matrix(distribution, seed, K, D):
    m = MeasurementMatrix(distribution, int(seed), int(K), int(D))
    m.entries  # materialize eagerly so errors and cost surface here
    return m


def measurements_for_ratio(D, compression_ratio):
    if compression_ratio < 1:
        raise DimensionError("compression ratio must be >= 1")
    return max(1, int(round(D / compression_ratio)))


@dataclass(frozen=True)
class CompressedVideo:
    """Measurement stream Z with column t = phi @ frame t (+ noise)."""

    measurements: np.ndarray
    frame_dims: tuple
    matrix: MeasurementMatrix
    noise_sigma: float = 0.0
    derivative_order: int = 0

    def __post_init__(self):
        K, _ = self.measurements.shape
        P, Q = self.frame_dims
        if K != self.matrix.K or P * Q != self.matrix.D:
            raise DimensionError(
                f"measurements {self.measurements.shape} / frame {self.frame_dims} "
                f"inconsistent with matrix K={self.matrix.K}, D={self.matrix.D}"
            )

    @property
    def frames(self):
        return self.measurements.shape[1]


def compress(v, m, noise_sigma=0.0, noise_seed=None):
    """Project every frame of ``v`` with ``m``; optional i.i.d. Gaussian noise.

    Noise for column t is drawn from the SplitMix64 stream seeded with
    ``mix(noise_seed ^ (NOISE_STREAM + t))``; ``noise_seed`` defaults to the
    matrix seed.
    """
    v = as_volume(v, "video")
    P, Q, R = v.shape
    if P * Q != m.D:
        raise DimensionError(f"frame has {P * Q} pixels but matrix expects D={m.D}")
    if noise_sigma < 0:
        raise ValueError("noise_sigma must be >= 0")
    Z = m.entries @ frames_to_matrix(v)
    if noise_sigma > 0:
        base = m.seed if noise_seed is None else int(noise_seed)
        noise = np.column_stack(
            [gaussian_stream(sub_seed(base, NOISE_STREAM + t), m.K) for t in range(R)]
        )
        Z = Z + noise_sigma * noise
    return CompressedVideo(Z, (P, Q), m, float(noise_sigma), 0)


def compressed_temporal_derivative(z):
    if z.derivative_order != 0:
        raise OrderError("measurement stream is already temporally differenced")
    if z.frames < 2:
        raise InsufficientFramesError(f"need >= 2 measurement columns, got {z.frames}")
    Zd = z.measurements[:, 1:] - z.measurements[:, :-1]
    return replace(z, measurements=Zd, derivative_order=1)


def backproject(z, m=None):
    """Adjoint lift phi^T Z, one frame per measurement column.

    This is not a reconstruction: it only realizes
    <phi a, phi b> = <phi^T phi a, b> so that compressed-domain correlations
    can be evaluated with ordinary FFT correlation.
    """
    m = z.matrix if m is None else m
    if m.identity() != z.matrix.identity():
        raise DimensionError("measurement matrix does not match the one used for sensing")
    P, Q = z.frame_dims
    return matrix_to_frames(m.entries.T @ z.measurements, P, Q)


@dataclass
class JlReport:
    K: int
    D: int
    trial_count: int
    epsilon_samples: np.ndarray = field(repr=False)
    mean_abs_error: float = 0.0
    max_abs_error: float = 0.0
    predicted_scale: float = 0.0


def unit_pairs(D, trial_count, rng, pairs="orthogonal"):
    a = rng.standard_normal((trial_count, D))
    a /= np.linalg.norm(a, axis=1, keepdims=True)
    if pairs == "self":
        return a, a.copy()
    b = rng.standard_normal((trial_count, D))
    if pairs == "orthogonal":
        b -= np.sum(a * b, axis=1, keepdims=True) * a
    elif pairs != "random":
        raise ValueError(f"unknown pair kind {pairs!r}")
    b /= np.linalg.norm(b, axis=1, keepdims=True)
    return a, b


def jl_report(distribution, seed, K, D, trial_count, vector_seed=0, pairs="orthogonal"):
    """Empirical |<phi a, phi b> - <a, b>| over random unit-norm pairs."""
    if trial_count < 1:
        raise ValueError("trial_count must be >= 1")
    m = make_matrix(distribution, seed, K, D)
    rng = np.random.default_rng(vector_seed)
    a, b = unit_pairs(D, trial_count, rng, pairs)
    pa = a @ m.entries.T
    pb = b @ m.entries.T
    eps = np.abs(np.sum(pa * pb, axis=1) - np.sum(a * b, axis=1))
    return JlReport(
        K=K,
        D=D,
        trial_count=trial_count,
        epsilon_samples=eps,
        mean_abs_error=float(eps.mean()),
        max_abs_error=float(eps.max()),
        predicted_scale=1.0 / np.sqrt(K),
    )
