"""Command line interface: ``hdnsboot simulate|deps|bootstrap-diag|test|mc``."""
from __future__ import annotations

import argparse
import csv
import json
import logging
import sys
from pathlib import Path

import numpy as np

from . import bootstrap as bs
from .dependence import estimate_theta
from .gaussian import min_eigenvalue
from .harness import ExperimentAborted, ExperimentConfig, emit_report, run_experiment
from .inference import run_combined_test, run_threshold_test
from .models import ModelSpec, SERIES_MODELS, simulate_model


def _floats(text: str) -> list:
    return [float(v) for v in text.split(",") if v.strip()]


def _ints(text: str) -> list:
    return [int(v) for v in text.split(",") if v.strip()]


def _window(text: str):
    return "auto" if text == "auto" else int(text)


def write_series_csv(data: np.ndarray, path) -> None:
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(["t"] + [f"x{j + 1}" for j in range(data.shape[1])])
        for i, row in enumerate(data, start=1):
            w.writerow([i] + [repr(float(v)) for v in row])


def read_series_csv(path) -> np.ndarray:
    """Read a ``simulate`` CSV (``t,x1,...``) or a plain numeric matrix."""
    with open(path, newline="") as fh:
        rows = list(csv.reader(fh))
    if rows and rows[0] and rows[0][0].strip() == "t":
        return np.array([[float(v) for v in r[1:]] for r in rows[1:] if r], dtype=np.float64)
    return np.array([[float(v) for v in r] for r in rows if r], dtype=np.float64)


def read_vector(path) -> np.ndarray:
    """One value per line."""
    lines = Path(path).read_text().split()
    return np.array([float(v) for v in lines], dtype=np.float64)


def cmd_simulate(args) -> int:
    spec = ModelSpec(args.model, args.n, args.d, seed=args.seed, burn_in=args.burn_in,
                     t_df=args.t_df)
    write_series_csv(simulate_model(spec).data, args.out)
    return 0


def cmd_deps(args) -> int:
    spec = ModelSpec(args.model, args.n, args.d, seed=args.seed, burn_in=args.burn_in)
    with open(args.out, "w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(["k", "coord", "theta_hat", "mc_se"])
        for k in range(args.k_max + 1):
            est = estimate_theta(spec, k, args.q, args.reps, args.seed)
            for j, (th, se) in enumerate(zip(est.per_coord, est.mc_se), start=1):
                w.writerow([k, j, repr(float(th)), repr(float(se))])
            top = int(np.argmax(est.per_coord))
            w.writerow([k, "max", repr(est.max_over_coords), repr(float(est.mc_se[top]))])
    return 0


def cmd_bootstrap_diag(args) -> int:
    x = read_series_csv(args.inp)
    L = bs.select_block_size(x) if args.L == "auto" else args.L
    psi = bs.block_sums(x, L)
    sigma_boot = bs.conditional_covariance(psi)
    if args.target:
        target = np.atleast_2d(read_series_csv(args.target))
    else:
        # without a population target, compare against the empirical covariance of B draws
        draws = bs.bootstrap_sample(x, L, args.B, args.seed, psi=psi).draws
        target = draws.T @ draws / draws.shape[0]
    diag = bs.delta_diagnostics(target, sigma_boot)
    out = {"L": int(L), "delta_frobenius": diag.delta_frobenius, "delta_max": diag.delta_max,
           "min_eigenvalue_boot": min_eigenvalue(sigma_boot)}
    Path(args.out).write_text(json.dumps(out, indent=2))
    return 0


def cmd_test(args) -> int:
    X = read_series_csv(args.x)
    y = read_vector(args.y)
    beta0 = read_vector(args.beta0)
    if args.which == "combined":
        outcome = run_combined_test((X, y), beta0, args.alpha, args.L, args.B, args.seed)
    else:
        outcome = run_threshold_test((X, y), beta0, args.alpha, args.L, args.B, args.b_sigma,
                                     args.seed)
    Path(args.out).write_text(json.dumps(outcome.to_dict(), indent=2))
    return 0


_MC_KINDS = {
    ("type1", "combined"): "TYPE1_COMBINED", ("type1", "threshold"): "TYPE1_THRESHOLD",
    ("power", "combined"): "POWER_COMBINED", ("power", "threshold"): "POWER_THRESHOLD",
    ("rate-delta", None): "RATE_DELTA", ("rate-ga", None): "RATE_GA",
}


def mc_config(args) -> ExperimentConfig:
    if args.config:
        return ExperimentConfig.from_dict(json.loads(Path(args.config).read_text()))
    test = None if args.which.startswith("rate") else args.test
    kind = _MC_KINDS[(args.which, test)]
    model = ModelSpec(args.model, args.n, max(args.d), burn_in=args.burn_in)
    return ExperimentConfig(
        kind=kind, model=model, d_grid=args.d, alpha_grid=args.alpha, reps=args.reps, B=args.B,
        n=args.n, delta_grid=args.delta or [], alternative=args.alternative,
        r_fraction=args.r_fraction if len(args.r_fraction) > 1 else args.r_fraction[0],
        seed=args.seed, workers=args.workers or 1, L=args.L, b_sigma=args.b_sigma,
        n_grid=args.n_grid or [], target_reps=args.target_reps, m=args.m,
        statistic=args.statistic,
    )


def cmd_mc(args) -> int:
    config = mc_config(args)
    if args.workers is not None:
        config.workers = args.workers
    try:
        report = run_experiment(config)
    except ExperimentAborted as exc:
        print(f"aborted: {exc}", file=sys.stderr)
        return 2
    fmt = args.format or ("JSON" if str(args.out).lower().endswith(".json") else "CSV")
    emit_report(report, fmt, args.out)
    return 0


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="hdnsboot", description=__doc__)
    p.add_argument("-v", "--verbose", action="store_true")
    sub = p.add_subparsers(dest="command", required=True)

    s = sub.add_parser("simulate", help="simulate one of the models M1-M5 to CSV")
    s.add_argument("--model", choices=SERIES_MODELS, required=True)
    s.add_argument("--n", type=int, required=True)
    s.add_argument("--d", type=int, required=True)
    s.add_argument("--seed", type=int, required=True)
    s.add_argument("--burn-in", type=int, default=200)
    s.add_argument("--t-df", type=float, default=5.0)
    s.add_argument("--out", required=True)
    s.set_defaults(func=cmd_simulate)

    s = sub.add_parser("deps", help="physical dependence measures by coupled simulation")
    s.add_argument("--model", choices=SERIES_MODELS, required=True)
    s.add_argument("--n", type=int, required=True)
    s.add_argument("--d", type=int, required=True)
    s.add_argument("--k-max", type=int, required=True)
    s.add_argument("--q", type=float, default=2.0)
    s.add_argument("--reps", type=int, default=1000)
    s.add_argument("--seed", type=int, default=0)
    s.add_argument("--burn-in", type=int, default=200)
    s.add_argument("--out", required=True)
    s.set_defaults(func=cmd_deps)

    s = sub.add_parser("bootstrap-diag", help="bootstrap covariance diagnostics for a series")
    s.add_argument("--in", dest="inp", required=True)
    s.add_argument("--L", type=_window, default="auto")
    s.add_argument("--B", type=int, default=1000)
    s.add_argument("--seed", type=int, default=0)
    s.add_argument("--target", help="optional CSV with a d x d target covariance")
    s.add_argument("--out", required=True)
    s.set_defaults(func=cmd_bootstrap_diag)

    s = sub.add_parser("test", help="combined or threshold bootstrap test")
    s.add_argument("which", choices=["combined", "threshold"])
    s.add_argument("--x", required=True)
    s.add_argument("--y", required=True)
    s.add_argument("--beta0", required=True)
    s.add_argument("--alpha", type=float, default=0.05)
    s.add_argument("--L", type=_window, default="auto")
    s.add_argument("--B", type=int, default=1000)
    s.add_argument("--b-sigma", type=int, default=200)
    s.add_argument("--seed", type=int, default=0)
    s.add_argument("--out", required=True)
    s.set_defaults(func=cmd_test)

    s = sub.add_parser("mc", help="Monte Carlo experiments")
    s.add_argument("which", choices=["type1", "power", "rate-delta", "rate-ga"])
    s.add_argument("--config", help="JSON experiment configuration (overrides flags)")
    s.add_argument("--test", choices=["combined", "threshold"], default="combined")
    s.add_argument("--model", choices=SERIES_MODELS, default="M1")
    s.add_argument("--n", type=int, default=500)
    s.add_argument("--d", type=_ints, default=[5])
    s.add_argument("--alpha", type=_floats, default=[0.05, 0.10])
    s.add_argument("--reps", type=int, default=2000)
    s.add_argument("--B", type=int, default=1000)
    s.add_argument("--seed", type=int, default=0)
    s.add_argument("--workers", type=int, default=None, help="worker processes (default 1)")
    s.add_argument("--L", type=_window, default="auto")
    s.add_argument("--b-sigma", type=int, default=200)
    s.add_argument("--burn-in", type=int, default=200)
    s.add_argument("--delta", type=_floats, default=None)
    s.add_argument("--alternative", choices=["SPARSE", "UNIFORM"], default="SPARSE")
    s.add_argument("--r-fraction", type=_floats, default=[0.0])
    s.add_argument("--n-grid", type=_ints, default=None)
    s.add_argument("--target-reps", type=int, default=2000)
    s.add_argument("--m", type=int, default=2000)
    s.add_argument("--statistic", choices=["sum", "regression"], default="sum")
    s.add_argument("--format", choices=["CSV", "JSON"], default=None)
    s.add_argument("--out", required=True)
    s.set_defaults(func=cmd_mc)
    return p


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING)
    return args.func(args)


if __name__ == "__main__":
    sys.exit(main())
