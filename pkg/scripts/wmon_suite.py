"""WMON scan over the built-in mechanisms and random 2x2 configurations."""

import argparse
import random

from truthsched.corpus import GENERATORS_2X2
from truthsched.mechanisms import build_mechanism
from truthsched.wmon import wmon_scan


def main():
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--trials", type=int, default=2000)
    ap.add_argument("--configs", type=int, default=3, help="random configs per 2x2 family")
    ap.add_argument("--generator", default="mixed")
    ap.add_argument("--seed", type=int, default=0)
    args = ap.parse_args()
    mechs = [build_mechanism(name) for name in ("vcg", "wvcg", "maxcost")]
    rng = random.Random(args.seed)
    for gen in GENERATORS_2X2.values():
        mechs += [gen(rng) for _ in range(args.configs)]
    for mech in mechs:
        print(wmon_scan(mech, args.generator, args.trials, args.seed).summary())


if __name__ == "__main__":
    main()
