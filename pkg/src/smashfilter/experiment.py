"""Evaluation harness: leave-one-out recognition, CR sweeps, localization."""
import os
import time
from concurrent.futures import ThreadPoolExecutor
from dataclasses import asdict, dataclass, field, replace

import numpy as np

from .dataset import response_truth_centers, training_clip
from .inference import SvmParams, classify, feature_vector, peak_psr_scores, train_svm
from .localization import center_error, locate_video
from .mach import build_filter
from .sensing import (
    backproject,
    compress,
    compressed_temporal_derivative,
    make_matrix,
    measurements_for_ratio,
)
from .stsf import FilterBank
from .volume import correlate3, correlate3_many, temporal_derivative


def thread_count():
    """Worker count from SMASH_THREADS (0 or unset = one per CPU)."""
    n = int(os.environ.get("SMASH_THREADS", "0") or 0)
    return n if n > 0 else (os.cpu_count() or 1)


def ordered_map(fn, items):
    items = list(items)
    workers = min(thread_count(), len(items)) or 1
    if workers == 1:
        return [fn(x) for x in items]
    with ThreadPoolExecutor(max_workers=workers) as pool:
        return list(pool.map(fn, items))


@dataclass
class ExperimentConfig:
    compression_ratio: float = 100.0
    distribution: str = "gaussian"
    seed: int = 1
    noise_sigma: float = 0.0
    alpha: float = 1.0
    beta: float = 1e-3
    gamma: float = 1e-3
    lam: float = 0.7
    mode: str = "svm"
    protocol: str = "leave-one-out"
    svm: SvmParams = field(default_factory=SvmParams)

    def measurements(self, D):
        return measurements_for_ratio(D, self.compression_ratio)

    def manifest(self):
        flat = asdict(self)
        svm = flat.pop("svm")
        flat.update({f"svm_{k}": v for k, v in svm.items()})
        return flat


class Lifter:
    """Turns raw videos into the volume that filters are correlated against.

    At compression ratio 1 this is the uncompressed derivative (the oracle
    path).  Otherwise frames are sensed, differenced in the measurement
    domain and lifted with phi^T, so correlating the result with a filter
    gives the smashed response.
    """

    def __init__(self, frame_dims, cfg):
        self.cfg = cfg
        D = frame_dims[0] * frame_dims[1]
        self.oracle = cfg.compression_ratio <= 1
        self.matrix = None if self.oracle else make_matrix(cfg.distribution, cfg.seed, cfg.measurements(D), D)

    @property
    def K(self):
        return None if self.matrix is None else self.matrix.K

    def __call__(self, video, noise_seed=None):
        if self.oracle:
            return temporal_derivative(video)
        z = compress(video, self.matrix, self.cfg.noise_sigma, noise_seed)
        return backproject(compressed_temporal_derivative(z), self.matrix)


def noise_seed(cfg, index):
    return (cfg.seed * 1_000_003 + index + 1) & ((1 << 64) - 1)


def build_bank(train, clip, cfg, actions):
    filters = []
    for a in actions:
        clips = [training_clip(s, clip) for s in train if s.label == a]
        filters.append(build_filter(clips, cfg.alpha, cfg.beta, cfg.gamma, label=a))
    return FilterBank(filters, list(actions))


def bank_responses(lifted, bank):
    return correlate3_many(lifted, [f.volume for f in bank.filters])


@dataclass
class LooResult:
    accuracy: float
    predictions: list
    labels: list
    runtimes: list
    K: object = None

    @property
    def mean_runtime(self):
        return float(np.mean(self.runtimes))


def leave_one_out(samples, clip, cfg, modes=("svm",)):
    """Hold out each video in turn; train filters (and the SVM) on the rest.

    Per-video runtime covers sensing, lifting, correlation with the bank,
    feature extraction and classification of the held-out video.
    """
    actions = list(dict.fromkeys(s.label for s in samples))
    lifter = Lifter(samples[0].video.shape[:2], cfg)

    def lift(i):
        t = time.perf_counter()
        out = lifter(samples[i].video, noise_seed=noise_seed(cfg, i))
        return out, time.perf_counter() - t

    lifted, lift_time = zip(*ordered_map(lift, range(len(samples))))

    def fold(i):
        train_idx = [j for j in range(len(samples)) if j != i]
        bank = build_bank([samples[j] for j in train_idx], clip, cfg, actions)
        if "svm" in modes:
            feats = [feature_vector(bank_responses(lifted[j], bank)) for j in train_idx]
            model = train_svm(feats, [samples[j].label for j in train_idx], cfg.svm, classes=actions)
        t = time.perf_counter()
        responses = bank_responses(lifted[i], bank)
        out = {}
        if "svm" in modes:
            out["svm"] = actions[classify(feature_vector(responses), model)[0]]
        if "peak-psr" in modes:
            scores = peak_psr_scores(responses, bank.filter_to_action, len(actions))
            out["peak-psr"] = actions[int(np.argmax(scores))]
        return out, lift_time[i] + time.perf_counter() - t

    results = ordered_map(fold, range(len(samples)))
    labels = [s.label for s in samples]
    times = [r[1] for r in results]
    report = {}
    for m in modes:
        preds = [r[0][m] for r in results]
        acc = float(np.mean([p == l for p, l in zip(preds, labels)]))
        report[m] = LooResult(acc, preds, labels, times, lifter.K)
    return report


def cr_sweep(samples, clip, cfg, ratios=(1, 100, 200, 300, 500)):
    """One row per compression ratio: cr, K, accuracy, mean_runtime_s."""
    D = samples[0].video.shape[0] * samples[0].video.shape[1]
    rows = []
    for cr in ratios:
        c = replace(cfg, compression_ratio=cr)
        res = leave_one_out(samples, clip, c, modes=(cfg.mode,))[cfg.mode]
        K = D if cr <= 1 else c.measurements(D)
        rows.append({"cr": cr, "K": K, "accuracy": res.accuracy, "mean_runtime_s": res.mean_runtime})
    return rows


def localization_errors(samples, clip, cfg, mode="mass"):
    """Centre displacement for every response frame, using the true action's filter.

    Filters are trained leave-one-out, so a video never contributes to the
    filter that localizes it.
    """
    actions = list(dict.fromkeys(s.label for s in samples))
    lifter = Lifter(samples[0].video.shape[:2], cfg)

    def one(i):
        test = samples[i]
        train = [s for j, s in enumerate(samples) if j != i]
        bank = build_bank(train, clip, cfg, actions)
        f = bank.filters[actions.index(test.label)]
        r = correlate3(lifter(test.video, noise_seed=noise_seed(cfg, i)), f.volume)
        boxes = locate_video(r, f.dims, cfg.lam, mode)
        return center_error(boxes, response_truth_centers(test, f.dims[2]))[0]

    return np.concatenate(ordered_map(one, range(len(samples))))
