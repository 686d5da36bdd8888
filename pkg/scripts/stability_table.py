"""Stability angles for the NLS method table plus the BDF6 / BDF-SMFC q=8 comparison.

    python3 scripts/stability_table.py --out results/stability_table.csv
"""
import argparse
import csv
import sys
import time

from polyblock.bench import classical_bdf
from polyblock.builder import make_spec
from polyblock.stability import stability_angle


def rows():
    yield "BDF6", classical_bdf(6).block_matrices()
    yield "BDF-SMFC q=8", make_spec("bdf", "smfc", 8, 0.5)
    for q, a in ((2, 0.75), (3, 0.75), (5, 0.13), (6, 0.18), (7, 0.15)):
        yield "BDF-SMFC", make_spec("bdf", "smfc", q, a)
    for q, a in ((3, 0.32), (4, 0.20), (5, 0.136)):
        yield "Adams-PMFCmj FI3", make_spec("adams", "pmfcmj", q, a, "chebyshev", "classical", endpoint="fi3")
    for q, a in ((3, 0.75), (4, 0.50), (5, 0.33)):
        yield "Adams-SMFCmj FI3", make_spec("adams", "smfcmj", q, a, "chebyshev", endpoint="fi3")
    for q, a in ((2, 0.75), (3, 0.75), (4, 0.75), (5, 0.45), (6, 0.32), (7, 0.22), (8, 0.18)):
        yield "Adams-SMFCmj VI", make_spec("adams", "smfcmj", q, a, "chebyshev", endpoint="vi")


def main():
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--out", help="CSV path (default: stdout)")
    ap.add_argument("--samples", type=int, default=400)
    args = ap.parse_args()
    fh = open(args.out, "w", newline="") if args.out else sys.stdout
    w = csv.writer(fh)
    w.writerow(["group", "method", "angle_deg", "a90", "root_stable", "seconds"])
    for group, method in rows():
        t = time.perf_counter()
        rep = stability_angle(method, ray_samples=args.samples)
        w.writerow([group, rep.label, f"{rep.angle_deg:.2f}", rep.a90, rep.root_stable,
                    f"{time.perf_counter() - t:.2f}"])
        fh.flush()


if __name__ == "__main__":
    main()
