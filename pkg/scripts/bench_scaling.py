"""Wall time of learn_wb against m (and k), with the log-log slope per group.

    python scripts/bench_scaling.py --k 10 --eps 0.1 --m 1e4,1e5,1e6,1e7
"""

import argparse
import sys

from histloom.bench import REPEATS, run_grid, summarize, to_csv


def main(argv=None):
    ap = argparse.ArgumentParser(description=__doc__, formatter_class=argparse.RawDescriptionHelpFormatter)
    ap.add_argument("--k", type=lambda s: [int(v) for v in s.split(",")], default=[10])
    ap.add_argument("--eps", type=lambda s: [float(v) for v in s.split(",")], default=[0.1])
    ap.add_argument("--m", type=lambda s: [int(float(v)) for v in s.split(",")], default=[10**4, 10**5, 10**6, 10**7])
    ap.add_argument("--repeats", type=int, default=REPEATS)
    ap.add_argument("--seed", type=int, default=0)
    ap.add_argument("--out", default="-")
    args = ap.parse_args(argv)

    cells = run_grid(args.k, args.eps, args.m, args.seed, args.repeats)
    text = to_csv(cells)
    if args.out == "-":
        sys.stdout.write(text)
    else:
        with open(args.out, "w") as fh:
            fh.write(text)
    for g in summarize(cells)["groups"]:
        if "slope" in g:
            print(f"k={g['k']} eps={g['eps']} slope={g['slope']:.3f} max_ratio={g['max_ratio']:.3f}", file=sys.stderr)


if __name__ == "__main__":
    main()
