"""Features from response volumes and a deterministic linear SVM."""
from dataclasses import dataclass, field

import numpy as np

from .errors import DegenerateLabelsError, DimensionError, PoolingResolutionError

LEVELS = 3
POOL_SIZE = sum(8**level for level in range(LEVELS))  # 73
BLOCK_SIZE = 2 * POOL_SIZE  # 146
SIDELOBE_OUTER = 11
SIDELOBE_INNER = 5
STD_FLOOR = 1e-12
# standardized features are clipped to +-Z_CLIP; dims that were flat in training
# otherwise produce huge z-scores that swamp every other feature
Z_CLIP = 3.0


def _cell_bounds(dim, parts):
    return [(i * dim) // parts for i in range(parts + 1)]


def max_pool_features(r):
    """Three-level volumetric max-pool.

    Level l splits each axis at floor(i * dim / 2**l); cells are emitted level
    by level, row-major over (row, col, frame) cell indices.  Returns the 73
    maxima and the (row, col, frame) location of each.
    """
    data = np.asarray(getattr(r, "data", r), dtype=float)
    if data.ndim != 3 or min(data.shape) < 2 ** (LEVELS - 1):
        raise PoolingResolutionError(
            f"response {data.shape} too small for {LEVELS}-level pooling (need every dim >= 4)"
        )
    values, peaks = [], []
    for level in range(LEVELS):
        parts = 2**level
        bounds = [_cell_bounds(d, parts) for d in data.shape]
        for i in range(parts):
            for j in range(parts):
                for k in range(parts):
                    cell = data[
                        bounds[0][i] : bounds[0][i + 1],
                        bounds[1][j] : bounds[1][j + 1],
                        bounds[2][k] : bounds[2][k + 1],
                    ]
                    idx = np.unravel_index(np.argmax(cell), cell.shape)
                    values.append(cell[idx])
                    peaks.append((bounds[0][i] + idx[0], bounds[1][j] + idx[1], bounds[2][k] + idx[2]))
    return np.array(values), peaks


def psr_at(data, peak, outer=SIDELOBE_OUTER, inner=SIDELOBE_INNER):
    """Peak-to-sidelobe ratio at ``peak``; returns (psr, degenerate_region)."""
    ro, ri = outer // 2, inner // 2
    lo = [max(0, p - ro) for p in peak]
    hi = [min(s, p + ro + 1) for p, s in zip(peak, data.shape)]
    region = data[lo[0] : hi[0], lo[1] : hi[1], lo[2] : hi[2]]
    mask = np.ones(region.shape, dtype=bool)
    ilo = [max(0, p - ri) - l for p, l in zip(peak, lo)]
    ihi = [min(s, p + ri + 1) - l for p, s, l in zip(peak, data.shape, lo)]
    mask[ilo[0] : ihi[0], ilo[1] : ihi[1], ilo[2] : ihi[2]] = False
    side = region[mask]
    if side.size == 0:
        return 0.0, True
    sigma = side.std()
    if sigma < STD_FLOOR:
        return 0.0, False
    return float((data[peak] - side.mean()) / sigma), False


def psr_features(r, peaks):
    data = np.asarray(getattr(r, "data", r), dtype=float)
    return np.array([psr_at(data, tuple(p))[0] for p in peaks])


def response_block(r):
    pooled, peaks = max_pool_features(r)
    return np.concatenate([pooled, psr_features(r, peaks)])


def feature_vector(responses):
    """Per-filter [73 max-pool, 73 PSR] blocks, concatenated in bank order."""
    return np.concatenate([response_block(r) for r in responses])


def feature_names(bank_size):
    names = []
    for b in range(bank_size):
        names += [f"f{b}_pool{i}" for i in range(POOL_SIZE)]
        names += [f"f{b}_psr{i}" for i in range(POOL_SIZE)]
    return names


def peak_psr_scores(responses, filter_to_action, action_count):
    """Training-free scores: best global-peak PSR over each action's filters."""
    scores = np.full(action_count, -np.inf)
    for r, a in zip(responses, filter_to_action):
        data = np.asarray(getattr(r, "data", r))
        peak = np.unravel_index(np.argmax(data), data.shape)
        scores[a] = max(scores[a], psr_at(data, peak)[0])
    return scores


# --- linear SVM ---------------------------------------------------------


@dataclass
class SvmParams:
    reg: float = 1e-2
    epochs: int = 200
    seed: int = 0


@dataclass
class SvmModel:
    weights: np.ndarray  # (classes, dim)
    bias: np.ndarray  # (classes,)
    feature_mean: np.ndarray
    feature_std: np.ndarray
    classes: list = field(default_factory=list)
    params: SvmParams = field(default_factory=SvmParams)

    @property
    def class_count(self):
        return self.weights.shape[0]

    @property
    def dim(self):
        return self.weights.shape[1]

    def standardize(self, X):
        z = (np.asarray(X, dtype=float) - self.feature_mean) / self.feature_std
        return np.clip(z, -Z_CLIP, Z_CLIP)


def hinge_objective(w, X, y, reg):
    """reg/2 |w|^2 + mean(max(0, 1 - y <w, x>)); the last column of X is the bias input."""
    margins = 1.0 - y * (X @ w)
    return 0.5 * reg * w @ w + np.mean(np.maximum(0.0, margins))


def hinge_subgradient(w, X, y, reg):
    active = (1.0 - y * (X @ w)) > 0
    return reg * w - (y[active, None] * X[active]).sum(axis=0) / len(y)


def pegasos(X, y, reg, epochs, rng):
    """Stochastic subgradient descent with step 1/(reg t); returns the suffix average.

    The bias is folded into the last coordinate of X and regularized with
    the weights.
    """
    n, d = X.shape
    w = np.zeros(d)
    avg = np.zeros(d)
    n_avg = 0
    t = 0
    start_avg = (epochs * n) // 2
    for _ in range(epochs):
        for i in rng.permutation(n):
            t += 1
            eta = 1.0 / (reg * t)
            if y[i] * (X[i] @ w) < 1.0:
                w = (1.0 - eta * reg) * w + eta * y[i] * X[i]
            else:
                w = (1.0 - eta * reg) * w
            if t > start_avg:
                n_avg += 1
                avg += (w - avg) / n_avg
    return avg


def train_svm(features, labels, params=None, classes=None):
    """One-vs-rest linear SVMs on standardized features."""
    params = params or SvmParams()
    X = np.asarray(features, dtype=float)
    labels = list(labels)
    if X.ndim != 2 or X.shape[0] != len(labels):
        raise DimensionError(f"features {X.shape} do not match {len(labels)} labels")
    classes = list(classes) if classes is not None else sorted(set(labels))
    unknown = set(labels) - set(classes)
    if unknown:
        raise ValueError(f"labels {sorted(unknown)} not among classes")
    if len(set(labels)) < 2:
        raise DegenerateLabelsError("need at least two distinct classes to train")
    mean = X.mean(axis=0)
    std = X.std(axis=0)
    std[std <= 0] = 1.0
    Xs = np.hstack([np.clip((X - mean) / std, -Z_CLIP, Z_CLIP), np.ones((X.shape[0], 1))])
    W = np.zeros((len(classes), X.shape[1]))
    b = np.zeros(len(classes))
    for c, name in enumerate(classes):
        y = np.array([1.0 if l == name else -1.0 for l in labels])
        rng = np.random.default_rng([params.seed, c])
        w = pegasos(Xs, y, params.reg, params.epochs, rng)
        W[c], b[c] = w[:-1], w[-1]
    return SvmModel(W, b, mean, std, classes, params)


def class_scores(fv, model):
    fv = np.asarray(fv, dtype=float)
    if fv.shape != (model.dim,):
        raise DimensionError(f"feature vector has shape {fv.shape}, model expects ({model.dim},)")
    return model.weights @ model.standardize(fv) + model.bias


def classify(fv, model):
    """Return (class index, scores); ties go to the lowest index."""
    scores = class_scores(fv, model)
    return int(np.argmax(scores)), scores
