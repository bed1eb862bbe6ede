"""Worst observed approximation ratio of a mechanism on random clustered instances."""

import argparse
import random

from truthsched.core import expand_clustered, makespan, optimal_makespan_clustered
from truthsched.corpus import random_clustered
from truthsched.mechanisms import build_mechanism


def main():
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--mech", default="wvcg")
    ap.add_argument("--n", type=int, nargs="+", default=[2, 3, 5])
    ap.add_argument("--ell", type=int, default=2)
    ap.add_argument("--count", type=int, default=200)
    ap.add_argument("--seed", type=int, default=0)
    args = ap.parse_args()
    mech = build_mechanism(args.mech)
    rng = random.Random(args.seed)
    for n in args.n:
        worst = 0
        for _ in range(args.count):
            ci = random_clustered(rng, n, args.ell)
            m = expand_clustered(ci)
            worst = max(worst, makespan(m, mech(m)) / optimal_makespan_clustered(ci)[0])
        print(f"n={n} ell={args.ell} count={args.count} worst={float(worst):.4f} ({worst})")


if __name__ == "__main__":
    main()
