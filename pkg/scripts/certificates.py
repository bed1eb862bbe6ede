"""Run the lower-bound certificate driver for a mechanism over several n."""

import argparse

from truthsched.core import ConstantsProfile
from truthsched.lowerbound import certify_lower_bound
from truthsched.mechanisms import build_mechanism


def main():
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--mech", default="vcg")
    ap.add_argument("--n", type=int, nargs="+", default=[2, 3, 5])
    ap.add_argument("--seed", type=int, default=0)
    args = ap.parse_args()
    mech = build_mechanism(args.mech)
    for n in args.n:
        consts = ConstantsProfile.build(n)
        res = certify_lower_bound(mech, n, consts, seed=args.seed)
        cert = res.certificate
        if cert is None:
            print(f"n={n} branch={res.branch} no certificate")
            continue
        print(
            f"n={n} branch={res.branch} ratio={float(cert.ratio):.4f} "
            f"target={float(consts.rho):.4f} recheck={cert.recheck()}"
        )


if __name__ == "__main__":
    main()
