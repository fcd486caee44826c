"""Covariance-rate and Gaussian-approximation probes along an n grid.

Example:
    python3 scripts/rate_probes.py delta --n 250 1000 4000 --reps 50
    python3 scripts/rate_probes.py ga --n 125 500 2000 --m 100000 --statistic regression
"""
from __future__ import annotations

import argparse
from pathlib import Path

from hdnsboot.harness import ExperimentConfig, emit_report, run_experiment
from hdnsboot.models import ModelSpec


def main(argv=None):
    p = argparse.ArgumentParser(description=__doc__, formatter_class=argparse.RawDescriptionHelpFormatter)
    p.add_argument("probe", choices=["delta", "ga"])
    p.add_argument("--model", default="M1")
    p.add_argument("--d", type=int, nargs="+", default=[5])
    p.add_argument("--n", type=int, nargs="+", default=[250, 1000, 4000])
    p.add_argument("--reps", type=int, default=50, help="replications per cell (delta probe)")
    p.add_argument("--m", type=int, default=2000, help="draws per cell (ga probe)")
    p.add_argument("--target-reps", type=int, default=2000)
    p.add_argument("--statistic", choices=["sum", "regression"], default="regression")
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--out", default=None)
    args = p.parse_args(argv)

    kind = "RATE_DELTA" if args.probe == "delta" else "RATE_GA"
    cfg = ExperimentConfig(kind=kind, model=ModelSpec(args.model, 500, max(args.d)),
                           d_grid=args.d, n_grid=args.n, reps=args.reps, m=args.m,
                           target_reps=args.target_reps, statistic=args.statistic, seed=args.seed)
    report = run_experiment(cfg)
    out = Path(args.out or f"results/rate_{args.probe}.csv")
    out.parent.mkdir(parents=True, exist_ok=True)
    emit_report(report, "CSV", out)
    keys = (["median_delta_frobenius", "median_delta_max", "reference", "ratio"]
            if kind == "RATE_DELTA" else ["kolmogorov", "w2_1d", "w2_gaussian"])
    for c in report.cells:
        print(f"n={c['n']:<5d} d={c['d']:<3d} " + " ".join(f"{k}={c[k]:.4f}" for k in keys))
    print(f"wrote {out} ({report.runtime_seconds:.1f}s)")


if __name__ == "__main__":
    main()
