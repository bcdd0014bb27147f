"""Inner-product distortion of random projections as a function of K.

Prints mean and max |<phi a, phi b> - <a, b>| over unit orthogonal pairs,
next to the 1/sqrt(K) reference scale, for a ladder of K values.
"""
import argparse

import numpy as np

from smashfilter.sensing import jl_report


def main():
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--D", type=int, default=4096)
    ap.add_argument("--Ks", default="64,128,256,512,1024,2048")
    ap.add_argument("--trials", type=int, default=1000)
    ap.add_argument("--seed", type=int, default=3)
    ap.add_argument("--dist", choices=("gaussian", "bernoulli"), default="gaussian")
    args = ap.parse_args()

    print("K,mean_abs_error,max_abs_error,sqrt_K_times_mean,ratio_to_previous")
    prev = None
    for K in map(int, args.Ks.split(",")):
        r = jl_report(args.dist, args.seed, K, args.D, args.trials)
        ratio = "" if prev is None else f"{prev / r.mean_abs_error:.3f}"
        print(f"{K},{r.mean_abs_error:.5f},{r.max_abs_error:.5f},{np.sqrt(K) * r.mean_abs_error:.4f},{ratio}")
        prev = r.mean_abs_error


if __name__ == "__main__":
    main()
