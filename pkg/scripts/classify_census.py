"""Confusion table of the 2x2 classifier on random configurations of each family."""

import argparse
import random
from collections import Counter

from truthsched.corpus import CLASS_OF, GENERATORS_2X2
from truthsched.slicelab import classify_2x2


def main():
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--count", type=int, default=20)
    ap.add_argument("--seed", type=int, default=0)
    args = ap.parse_args()
    rng = random.Random(args.seed)
    for name, gen in GENERATORS_2X2.items():
        got = Counter(classify_2x2(gen(rng), seed=k).cls for k in range(args.count))
        hits = got[CLASS_OF[name]]
        print(f"{name:16s} {hits}/{args.count} correct  {dict(got)}")


if __name__ == "__main__":
    main()
