"""Monte Carlo share of regular k-sets that are not good, with a 95% interval."""

import argparse
import json

from truthsched.core import ConstantsProfile
from truthsched.lowerbound import estimate_bad_fraction
from truthsched.mechanisms import build_mechanism


def main():
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--mech", default="vcg")
    ap.add_argument("--n", type=int, default=3)
    ap.add_argument("--k", type=int, nargs="+", default=[1, 2])
    ap.add_argument("--trials", type=int, default=60)
    ap.add_argument("--seed", type=int, default=0)
    args = ap.parse_args()
    mech = build_mechanism(args.mech)
    consts = ConstantsProfile.build(args.n)
    for k in args.k:
        est = estimate_bad_fraction(mech, args.n, k, args.trials, consts, seed=args.seed)
        print(json.dumps(est.to_json()))


if __name__ == "__main__":
    main()
