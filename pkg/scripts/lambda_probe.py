"""Ratio certificates for VCG with an affine-minimizer slice planted at several task weights."""

import argparse
from fractions import Fraction

from truthsched.core import ConstantsProfile
from truthsched.lowerbound import lambda_probes
from truthsched.mechanisms import VCG, AffineMinimizer2x2, AffineMinimizerConfig2x2, EmbeddedSlice


def main():
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--lam", nargs="+", default=["1/3", "1/2", "2", "3"])
    args = ap.parse_args()
    n = 3
    consts = ConstantsProfile.build(n)
    for text in args.lam:
        lam = Fraction(text)
        rule = AffineMinimizer2x2(AffineMinimizerConfig2x2(Fraction(1), lam))
        mech = EmbeddedSlice(VCG(), rule, 0, 1, 1)
        cert = lambda_probes(mech, n, consts)
        shown = "none" if cert is None else f"{float(cert.ratio):.4f}"
        print(f"lambda={lam}: ratio {shown}")


if __name__ == "__main__":
    main()
