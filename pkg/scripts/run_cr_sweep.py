"""Recognition accuracy and per-video runtime across compression ratios on the synthetic suite.

    python3 scripts/run_cr_sweep.py --crs 1,100,200,300,500 --mode svm -o cr_sweep.csv
"""
import argparse
import sys

from smashfilter import codecs
from smashfilter.experiment import ExperimentConfig, cr_sweep
from smashfilter.synthetic import SuiteConfig, clip_spec, make_suite


def main():
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--crs", default="1,100,200,300,500")
    ap.add_argument("--mode", choices=("svm", "peak-psr"), default="svm")
    ap.add_argument("--seed", type=int, default=1)
    ap.add_argument("--suite-seed", type=int, default=0)
    ap.add_argument("--noise", type=float, default=0.0, help="measurement noise sigma")
    ap.add_argument("-o", "--output")
    args = ap.parse_args()

    sc = SuiteConfig()
    samples = make_suite(sc, seed=args.suite_seed)
    cfg = ExperimentConfig(seed=args.seed, noise_sigma=args.noise, mode=args.mode)
    ratios = [int(x) for x in args.crs.split(",")]
    rows = cr_sweep(samples, clip_spec(sc), cfg, ratios)
    header = ["cr", "K", "accuracy", "mean_runtime_s"]
    data = codecs.csv_bytes(header, [[r[h] for h in header] for r in rows])
    if args.output:
        codecs.atomic_write(args.output, data)
    sys.stdout.write(data.decode())


if __name__ == "__main__":
    main()
