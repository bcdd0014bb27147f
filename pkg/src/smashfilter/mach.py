"""3D Action-MACH filter synthesis in the frequency domain."""
from dataclasses import dataclass

import numpy as np

from .errors import ArityError, DimensionError, SingularDenominatorError
from .volume import as_volume, dft3, idft3, temporal_derivative
from .view import warp_volume


@dataclass(frozen=True)
class MachFilter:
    volume: np.ndarray
    alpha: float = 1.0
    beta: float = 1.0
    gamma: float = 1.0
    label: str = ""
    view_tag: object = "type1"  # "type1" | "type2" | ("compensated", AffineView)
    noise_spectrum_constant: float = 1.0

    def __post_init__(self):
        v = as_volume(self.volume, "filter")
        object.__setattr__(self, "volume", v)
        if not np.any(v):
            raise DimensionError("filter volume is identically zero")
        if min(self.alpha, self.beta, self.gamma) < 0:
            raise ValueError("alpha, beta, gamma must be >= 0")
        if self.alpha == self.beta == self.gamma == 0:
            raise ValueError("alpha, beta, gamma cannot all be zero")

    @property
    def dims(self):
        return self.volume.shape


@dataclass(frozen=True)
class SpectraStats:
    mean_spectrum: np.ndarray
    power_spectrum: np.ndarray
    similarity_spectrum: np.ndarray
    example_count: int

    @property
    def dims(self):
        return self.mean_spectrum.shape


def spectra_stats(examples):
    """Mean, power and similarity spectra of temporally differenced examples."""
    if len(examples) == 0:
        raise ArityError("need at least one training example")
    vols = [as_volume(e, "example") for e in examples]
    shape = vols[0].shape
    for v in vols[1:]:
        if v.shape != shape:
            raise DimensionError(f"training examples differ in shape: {shape} vs {v.shape}")
    X = np.stack([dft3(temporal_derivative(v)) for v in vols])
    M = X.mean(axis=0)
    D = np.mean(np.abs(X) ** 2, axis=0)
    S = np.mean(np.abs(X - M) ** 2, axis=0)
    return SpectraStats(M, D, S, len(vols))


def synthesize(stats, alpha=1.0, beta=1.0, gamma=1.0, label="", noise_constant=1.0):
    """h(u) = M_x(u) / (alpha*C + beta*D_x(u) + gamma*S_x(u)), back in space-time."""
    denom = alpha * noise_constant + beta * stats.power_spectrum + gamma * stats.similarity_spectrum
    bad = np.argwhere(denom <= 0)
    if len(bad):
        raise SingularDenominatorError(bad[0])
    H = idft3(stats.mean_spectrum / denom)
    return MachFilter(H, alpha, beta, gamma, label, "type1", noise_constant)


def normalize_filter(f):
    """Zero-mean, unit-energy copy of ``f``."""
    v = f.volume - f.volume.mean()
    norm = np.linalg.norm(v)
    if norm == 0:
        raise DimensionError("filter is constant; cannot normalize")
    return MachFilter(v / norm, f.alpha, f.beta, f.gamma, f.label, f.view_tag, f.noise_spectrum_constant)


def build_filter(examples, alpha=1.0, beta=1.0, gamma=1.0, label="", normalize=True):
    f = synthesize(spectra_stats(examples), alpha, beta, gamma, label)
    return normalize_filter(f) if normalize else f


def build_type2_bank(examples, transforms, alpha=1.0, beta=1.0, gamma=1.0, label="", normalize=False):
    """Warp every example to the canonical view, then synthesize one filter.

    ``transforms[i]`` maps example ``i`` to the canonical view.  Returns a
    one-element list so callers can extend banks uniformly.
    """
    if len(transforms) == 0 or len(examples) == 0:
        raise ArityError("need at least one (example, transform) pair")
    if len(transforms) != len(examples):
        raise ArityError(f"{len(examples)} examples but {len(transforms)} transforms")
    canonical = [warp_volume(e, t) for e, t in zip(examples, transforms)]
    f = synthesize(spectra_stats(canonical), alpha, beta, gamma, label)
    if normalize:
        f = normalize_filter(f)
    return [MachFilter(f.volume, f.alpha, f.beta, f.gamma, f.label, "type2", f.noise_spectrum_constant)]
