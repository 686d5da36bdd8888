"""Observed convergence orders on Prothero-Robinson and Burgers.

Writes one precision CSV per (problem, method) and a summary table.

    python3 scripts/convergence.py --out results/convergence [--problems pr burgers] [--jobs 1]
"""
import argparse
import csv
from pathlib import Path

from polyblock.bench import (
    BurgersConfig, burgers_problem, classical_bdf, convergence_study, log_steps, prothero_robinson_problem,
    reference_solution,
)
from polyblock.builder import make_spec

METHODS = (
    [(make_spec("bdf", "smfc", q, 0.5), q) for q in (2, 3, 4)]
    + [(make_spec("adams", "pmfcmj", q, a, ordering="classical", endpoint="vi"), q)
       for q, a in ((2, 3.0), (3, 1.25), (4, 0.64))]
    + [(make_spec("adams", "smvc", 3, 0.9, "chebyshev", endpoint="fi2"), 5)]
    + [(classical_bdf(k), k) for k in (2, 4)]
)


def setups(names, lam, N):
    if "pr" in names:
        p = prothero_robinson_problem(lam)
        yield "pr", p, (0.0, 1.0), p.exact(0.0), p.exact(1.0), log_steps(16, 4096, 8)
    if "burgers" in names:
        cfg = BurgersConfig(N=N)
        p = burgers_problem(cfg)
        y0 = cfg.initial().astype(complex)
        ref = reference_solution(p, (0.0, cfg.t_end), y0)
        yield "burgers", p, (0.0, cfg.t_end), y0, ref, [int(round(256 * 2 ** (k / 2))) for k in range(9)]


def main():
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--out", default="results/convergence")
    ap.add_argument("--problems", nargs="+", choices=("pr", "burgers"), default=["pr", "burgers"])
    ap.add_argument("--lam", type=float, default=-50.0)
    ap.add_argument("--N", type=int, default=256)
    ap.add_argument("--jobs", type=int, default=1)
    args = ap.parse_args()
    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    with open(out / "summary.csv", "w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(["problem", "method", "expected_order", "observed_order"])
        for name, problem, t_span, y0, ref, steps in setups(args.problems, args.lam, args.N):
            for method, want in METHODS:
                run = convergence_study(problem, method, steps, t_span, y0, ref, jobs=args.jobs)
                (out / f"{name}_{run.label.replace(':', '_')}.csv").write_text(run.to_csv())
                order = "" if run.order is None else f"{run.order:.3f}"
                w.writerow([name, run.label, want, order])
                fh.flush()
                print(f"{name:8s} {run.label:45s} expected {want}  observed {order or 'n/a'}")


if __name__ == "__main__":
    main()
