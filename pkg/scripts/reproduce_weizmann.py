"""Leave-one-out recognition and localization on a Weizmann-style PGM corpus.

Expects ROOT/<action>/<video>/NNNN.pgm frames plus centers.csv
(frame,row,col) per video.  Exits quietly when the corpus is missing.

    python3 scripts/reproduce_weizmann.py --data /path/to/weizmann --cr 100
"""
import argparse
import sys
from pathlib import Path

import numpy as np

from smashfilter.dataset import ClipSpec, load_corpus
from smashfilter.experiment import ExperimentConfig, leave_one_out, localization_errors
from smashfilter.localization import CDF_THRESHOLDS

REFERENCE_ACCURACY = 81.11  # percent at CR 100, for comparison


def main():
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--data", required=True)
    ap.add_argument("--cr", type=float, default=100.0)
    ap.add_argument("--clip", default="64,48,16", help="rows,cols,frames of the training clip")
    ap.add_argument("--localize", action="store_true")
    args = ap.parse_args()

    if not Path(args.data).is_dir():
        print(f"no corpus at {args.data}; nothing to do", file=sys.stderr)
        return 0
    samples = load_corpus(args.data)
    clip = ClipSpec(*map(int, args.clip.split(",")))
    cfg = ExperimentConfig(compression_ratio=args.cr)
    res = leave_one_out(samples, clip, cfg, modes=("svm", "peak-psr"))
    for mode, r in res.items():
        print(f"{mode}: accuracy {100 * r.accuracy:.2f}% (reference {REFERENCE_ACCURACY}%), "
              f"mean {r.mean_runtime:.2f}s per video")
    if args.localize:
        d = localization_errors(samples, clip, cfg)
        print("localization CDF: " + ", ".join(f"<={k}px {np.mean(d <= k):.2f}" for k in CDF_THRESHOLDS))
    return 0


if __name__ == "__main__":
    sys.exit(main())
