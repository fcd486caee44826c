"""Brute-force reference values for the derived test oracles.

Each pilot prints the quantity that the test suite freezes as a reference.
Run: python3 scripts/oracle_pilots.py [name ...]
"""
from __future__ import annotations

import argparse
import math
import time

import numpy as np

from hdnsboot.bootstrap import bootstrap_sample, conditional_covariance, block_sums, \
    default_block_grid, select_block_size
from hdnsboot.dependence import estimate_theta, cumulative_theta
from hdnsboot.harness import null_estimator_draws
from hdnsboot.inference import (combined_bootstrap, estimate_sigma_hat, ols_fit,
                                score_series, critical_value)
from hdnsboot.models import ModelSpec, generate_regression, simulate_model
from hdnsboot.rng import derive_seed, generator


def theta():
    spec = ModelSpec("M1", 500, 1)
    ests = [estimate_theta(spec, k, 2, reps=100_000, seed=1) for k in range(4)]
    for e in ests:
        print(f"k={e.k} theta={e.max_over_coords:.4f} se={e.mc_se[0]:.4f}")
    for k in range(1, 4):
        print(f"ratio k={k}: {ests[k].max_over_coords / ests[k - 1].max_over_coords:.4f}")
    lags = [estimate_theta(spec, k, 2, reps=2000, seed=2) for k in range(41)]
    a, b = cumulative_theta(lags[:21]), cumulative_theta(lags)
    print(f"Theta 0..20={a:.4f} 0..40={b:.4f} rel={(b - a) / b:.2e}")


def selector():
    grid = default_block_grid(500)
    lower = set(grid[: len(grid) // 2])
    hits = sum(select_block_size(generator(s, "wn").standard_normal((500, 1))) in lower
               for s in range(200))
    print(f"white noise: grid={grid}, lower-half share={hits / 200:.3f}")
    Ls = [select_block_size(simulate_model(ModelSpec("M1", 500, 5, seed=s)).data)
          for s in range(200)]
    share = np.mean([4 <= L <= 24 for L in Ls])
    print(f"M1: share in [4, 24]={share:.3f}, counts={np.unique(Ls, return_counts=True)}")


def sigma():
    spec = ModelSpec("M1", 500, 5)
    draws = null_estimator_draws(spec, [derive_seed(3, "sd", i) for i in range(2000)])
    mc_sd = draws.std(axis=0, ddof=1) / math.sqrt(500)
    ratios = []
    for s in range(50):
        data = generate_regression(spec.with_seed(1000 + s), np.ones(5))
        fit = ols_fit(data)
        cfg = estimate_sigma_hat(fit, data.X, "auto", 200, seed=s)
        ratios.append(cfg.sigma_hat / mc_sd)
    ratios = np.array(ratios)
    print(f"mc sd={mc_sd}")
    print(f"sigma_hat/mc_sd over 50 datasets: min={ratios.min():.3f} max={ratios.max():.3f}")
    print(f"seed-1000 dataset ratios={ratios[0]}")


def quantile():
    spec = ModelSpec("M1", 500, 5)
    rel = []
    for s in range(100):
        data = generate_regression(spec.with_seed(2000 + s), np.ones(5))
        fit = ols_fit(data)
        q = [critical_value(combined_bootstrap(fit, data.X, "auto", 1000, seed), 0.05)
             for seed in (1, 2)]
        rel.append(abs(q[0] - q[1]) / min(q))
    rel = np.array(rel)
    print(f"95% quantile relative gap: max={rel.max():.4f} mean={rel.mean():.4f}")


def ols():
    spec = ModelSpec("M1", 500, 5)
    err = [np.max(np.abs(ols_fit(generate_regression(spec.with_seed(s), np.ones(5))).beta_hat - 1))
           for s in range(500)]
    print(f"|beta_hat - 1|_inf: share < 0.5 = {np.mean(np.array(err) < 0.5):.3f}, max={max(err):.4f}")


def variance():
    X = simulate_model(ModelSpec("M1", 500, 5, seed=11)).data
    psi = block_sums(X, 8)
    cov = conditional_covariance(psi)
    draws = bootstrap_sample(None, 8, 2000, 5, psi=psi).draws
    print(f"draw variance / exact diagonal = {draws.var(axis=0) / np.diag(cov)}")


PILOTS = {"theta": theta, "selector": selector, "sigma": sigma, "quantile": quantile,
          "ols": ols, "variance": variance}


def main():
    p = argparse.ArgumentParser(description=__doc__)
    p.add_argument("names", nargs="*", help=f"subset of {sorted(PILOTS)} (default: all)")
    names = p.parse_args().names or list(PILOTS)
    unknown = set(names) - set(PILOTS)
    if unknown:
        p.error(f"unknown pilots: {sorted(unknown)}")
    for name in names:
        t = time.perf_counter()
        print(f"== {name}")
        PILOTS[name]()
        print(f"   ({time.perf_counter() - t:.1f}s)")


if __name__ == "__main__":
    main()
