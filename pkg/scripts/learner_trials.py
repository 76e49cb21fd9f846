"""Seeded learner trials on synthetic targets; one CSV row per trial.

    python scripts/learner_trials.py --k 2,5 --eps 0.1 --eta 0,0.05 --trials 10
"""

import argparse
import csv
import sys
import time

from histloom.density import l1_distance
from histloom.learner import LearnerConfig, learn_wb
from histloom.selection import agnostic_learn
from histloom.sources import DistributionSource, derive_seed
from histloom.targets import generate_target


def floats(s):
    return [float(v) for v in s.split(",") if v]


def main(argv=None):
    ap = argparse.ArgumentParser(description=__doc__, formatter_class=argparse.RawDescriptionHelpFormatter)
    ap.add_argument("--k", type=lambda s: [int(v) for v in s.split(",")], default=[2, 5])
    ap.add_argument("--eps", type=floats, default=[0.1])
    ap.add_argument("--eta", type=floats, default=[0.0, 0.05])
    ap.add_argument("--trials", type=int, default=10)
    ap.add_argument("--seed", type=int, default=0)
    ap.add_argument("--agnostic", action="store_true", help="also run the guess-ladder learner")
    ap.add_argument("--out", default="-")
    args = ap.parse_args(argv)

    fh = sys.stdout if args.out == "-" else open(args.out, "w", newline="")
    w = csv.writer(fh)
    w.writerow(["k", "eps", "eta", "trial", "learner", "l1", "pieces", "draws", "seconds"])
    for ci, (k, eps, eta) in enumerate((k, e, h) for k in args.k for e in args.eps for h in args.eta):
        spec = f"kflat-plus-noise:k={k};eta={eta}" if eta > 0 else f"kflat:k={k}"
        for trial in range(args.trials):
            p = generate_target(spec, derive_seed(args.seed, ci, trial, 0)).target
            runs = [("learn_wb", lambda src: learn_wb(LearnerConfig(k=k, eps=eps), src))]
            if args.agnostic:
                runs.append(("agnostic", lambda src: agnostic_learn(k, eps, src)))
            for j, (name, fn) in enumerate(runs, start=1):
                src = DistributionSource(p, derive_seed(args.seed, ci, trial, j))
                t0 = time.perf_counter()
                h = fn(src)
                dt = time.perf_counter() - t0
                w.writerow([k, eps, eta, trial, name, f"{l1_distance(h, p):.6g}", h.pieces, src.draws, f"{dt:.4f}"])
    if fh is not sys.stdout:
        fh.close()


if __name__ == "__main__":
    main()
