"""Collision-distinguisher advantage across m / sqrt(N): the sqrt(N) phase transition.

    python scripts/lowerbound_phase.py --N 1000000 --trials 200
"""

import argparse
import csv
import math
import sys
from fractions import Fraction

from histloom.lowerbound import distinguishing_experiment
from histloom.sources import derive_seed


def main(argv=None):
    ap = argparse.ArgumentParser(description=__doc__, formatter_class=argparse.RawDescriptionHelpFormatter)
    ap.add_argument("--N", type=int, default=10**6)
    ap.add_argument("--t", type=Fraction, default=Fraction(1, 4))
    ap.add_argument("--c", type=lambda s: [float(v) for v in s.split(",")], default=[0.1, 0.3, 1, 3, 10, 30, 50])
    ap.add_argument("--trials", type=int, default=200)
    ap.add_argument("--seed", type=int, default=0)
    ap.add_argument("--out", default="-")
    args = ap.parse_args(argv)

    fh = sys.stdout if args.out == "-" else open(args.out, "w", newline="")
    w = csv.writer(fh)
    w.writerow(["N", "t", "c", "m", "rate_uniform", "rate_hard", "advantage"])
    for i, c in enumerate(args.c):
        m = max(1, math.ceil(c * math.sqrt(args.N)))
        rep = distinguishing_experiment(args.N, args.t, m, args.trials, "collision", derive_seed(args.seed, i))
        w.writerow([args.N, float(args.t), c, m, rep.rate_uniform, rep.rate_hard, f"{rep.advantage:.4f}"])
        fh.flush()
    if fh is not sys.stdout:
        fh.close()


if __name__ == "__main__":
    main()
