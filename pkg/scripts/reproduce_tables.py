"""Type I error tables for the combined and threshold tests.

Combined test: models M1-M5 over a d grid at alpha 5% and 10%.
Threshold test: M1 over a d grid and sparsity fractions r/d.

Example (full size, a few hours on one core):
    python3 scripts/reproduce_tables.py --out-dir results/tables
Smaller run:
    python3 scripts/reproduce_tables.py --reps 500 --d 5 --models M1 M2
"""
from __future__ import annotations

import argparse
from pathlib import Path

from hdnsboot.harness import ExperimentConfig, emit_report, run_experiment
from hdnsboot.models import ModelSpec


def main(argv=None):
    p = argparse.ArgumentParser(description=__doc__, formatter_class=argparse.RawDescriptionHelpFormatter)
    p.add_argument("--models", nargs="+", default=["M1", "M2", "M3", "M4", "M5"])
    p.add_argument("--d", type=int, nargs="+", default=[5, 10, 15, 20, 25])
    p.add_argument("--r-fraction", type=float, nargs="+", default=[0.0, 0.4])
    p.add_argument("--reps", type=int, default=2000)
    p.add_argument("--B", type=int, default=1000)
    p.add_argument("--seed", type=int, default=2024)
    p.add_argument("--workers", type=int, default=1)
    p.add_argument("--skip-threshold", action="store_true")
    p.add_argument("--out-dir", default="results/tables")
    args = p.parse_args(argv)
    out = Path(args.out_dir)
    out.mkdir(parents=True, exist_ok=True)

    jobs = [("combined", m, "TYPE1_COMBINED", 0.0) for m in args.models]
    if not args.skip_threshold:
        jobs.append(("threshold", "M1", "TYPE1_THRESHOLD", args.r_fraction))
    for name, model, kind, r in jobs:
        cfg = ExperimentConfig(kind=kind, model=ModelSpec(model, 500, max(args.d)), d_grid=args.d,
                               reps=args.reps, B=args.B, seed=args.seed, workers=args.workers,
                               r_fraction=r)
        report = run_experiment(cfg)
        emit_report(report, "CSV", out / f"type1_{name}_{model}.csv")
        for c in report.cells:
            tag = f" r={c['r']}" if c["r"] is not None else ""
            print(f"{name:9s} {model} d={c['d']:<3d}{tag} alpha={c['alpha']:.2f} "
                  f"rate={100 * c['rejection_rate']:.2f}% (se {100 * c['mc_se']:.2f})", flush=True)


if __name__ == "__main__":
    main()
