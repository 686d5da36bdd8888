"""Stability angle as a function of alpha for BDF and GBDF serial methods.

    python3 scripts/alpha_sweeps.py --out results/alpha_sweeps.csv
"""
import argparse
import csv
import sys

import numpy as np

from polyblock.builder import make_spec
from polyblock.stability import alpha_sweep


def main():
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--out", help="CSV path (default: stdout)")
    ap.add_argument("--points", type=int, default=20)
    ap.add_argument("--qmax", type=int, default=6)
    ap.add_argument("--jobs", type=int, default=1)
    args = ap.parse_args()
    alphas = np.linspace(1.0 / args.points, 1.0, args.points)
    fh = open(args.out, "w", newline="") if args.out else sys.stdout
    w = csv.writer(fh)
    w.writerow(["family", "strategy", "q", "alpha", "theta_deg", "root_stable"])
    for family in ("bdf", "gbdf"):
        for strategy in ("smvc", "smfc"):
            for q in range(2, args.qmax + 1):
                sw = alpha_sweep(make_spec(family, strategy, q, 0.5), alphas, jobs=args.jobs)
                for a, th, rs in zip(sw.alphas, sw.thetas, sw.root_stable):
                    w.writerow([family, strategy, q, f"{a:.4f}", f"{th:.2f}", rs])
                fh.flush()


if __name__ == "__main__":
    main()
