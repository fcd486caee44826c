"""Physical dependence measures estimated by coupled simulation.

``theta_{k,j,q}`` is the ``L^q`` distance between coordinate ``j`` of the
process at time ``i`` and the same coordinate recomputed after the innovation
at time ``i - k`` is swapped for an independent copy. The estimator needs the
generator itself: it re-addresses single innovations by time index.
"""
from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Sequence

import numpy as np

from .gaussian import min_eigenvalue
from .models import (ModelSpec, SERIES_MODELS, ar_coefficients, innovations, run_recursion,
                     transition_matrix)
from .rng import derive_seed

__all__ = ["DependenceEstimate", "estimate_theta", "cumulative_theta", "geometric_tail_bound",
           "probe_indices", "min_eigenvalue"]

MIN_REPS = 100


@dataclass
class DependenceEstimate:
    k: int
    q: float
    per_coord: np.ndarray
    max_over_coords: float
    mc_se: np.ndarray
    reps: int


def probe_indices(n: int) -> list:
    """Quartile probe times standing in for the supremum over ``1 <= i <= n``."""
    return sorted({math.ceil(n / 4), math.ceil(n / 2), math.ceil(3 * n / 4), n})


def _rep_shocks(spec: ModelSpec, seed: int, reps: int, t_start: int, t_stop: int, tag: str):
    blocks = [innovations(spec.with_seed(derive_seed(seed, "theta-rep", r)), t_start, t_stop, tag)
              for r in range(reps)]
    return np.stack(blocks, axis=1)


def estimate_theta(spec: ModelSpec, k: int, q: float = 2.0, reps: int = 1000,
                   seed: int = 0) -> DependenceEstimate:
    """Monte Carlo estimate of ``theta_{k,j,q}`` for every coordinate ``j``.

    Each replication simulates the path, swaps the innovation ``k`` steps
    before a probe time for an independent copy and re-runs the recursion
    from there. The ``q``-th moment of the coordinate gaps is averaged over
    replications (compensated sums) and the maximum over probe times is kept.
    """
    if spec.model_id not in SERIES_MODELS:
        raise ValueError("dependence estimation needs one of the time series models")
    if int(k) != k or k < 0:
        raise ValueError("lag k must be a non-negative integer")
    if reps < MIN_REPS:
        raise ValueError(f"reps must be at least {MIN_REPS}")
    if not q >= 1:
        raise ValueError("moment order q must be >= 1")
    k, reps = int(k), int(reps)
    n, d, burn = spec.n, spec.d, spec.burn_in
    t0 = 1 - burn
    coefs = ar_coefficients(spec.model_id, n, burn)
    A = transition_matrix(spec)
    shocks = _rep_shocks(spec, seed, reps, t0, n + 1, "innovation")
    path = run_recursion(coefs, shocks, A)

    best = np.zeros(d)
    best_se = np.zeros(d)
    for probe in probe_indices(n):
        swap = probe - k
        if swap < t0:
            continue  # the swapped innovation predates the zero start
        copies = _rep_shocks(spec, seed, reps, swap, swap + 1, "innovation-copy")
        seg = shocks[swap - t0: probe - t0 + 1].copy()
        seg[0] = copies[0]
        x_prev = path[swap - t0 - 1] if swap > t0 else np.zeros((reps, d))
        alt = run_recursion(coefs[swap - t0: probe - t0 + 1], seg, A, x0=x_prev)[-1]
        gap = np.abs(path[probe - t0] - alt) ** q
        moment = np.array([math.fsum(gap[:, j]) for j in range(d)]) / reps
        theta = moment ** (1.0 / q)
        sd = np.std(gap, axis=0, ddof=1)
        with np.errstate(divide="ignore", invalid="ignore"):
            se = np.where(theta > 0, theta ** (1 - q) / q * sd / math.sqrt(reps), 0.0)
        take = theta > best
        best = np.where(take, theta, best)
        best_se = np.where(take, se, best_se)
    return DependenceEstimate(k=k, q=float(q), per_coord=best, max_over_coords=float(best.max()),
                              mc_se=best_se, reps=reps)


def _check_lags(estimates: Sequence[DependenceEstimate]) -> list:
    ests = sorted(estimates, key=lambda e: e.k)
    if not ests:
        raise ValueError("no estimates given")
    lags = [e.k for e in ests]
    if lags != list(range(lags[0], lags[0] + len(lags))):
        raise ValueError(f"lag range has gaps: {lags}")
    return ests


def cumulative_theta(estimates: Sequence[DependenceEstimate]) -> float:
    """Truncated ``Theta = max_j sum_{l=k0}^{K} theta_{l,j,q}`` over a contiguous lag range."""
    ests = _check_lags(estimates)
    total = np.sum([e.per_coord for e in ests], axis=0)
    return float(np.max(total))


def geometric_tail_bound(estimates: Sequence[DependenceEstimate]) -> float:
    """Geometric extrapolation of the omitted tail ``sum_{l>K} theta_l``.

    Uses the ratio of the last two lag maxima; returns ``inf`` when the ratio
    does not indicate decay.
    """
    ests = _check_lags(estimates)
    if len(ests) < 2:
        return math.inf
    last, prev = ests[-1].max_over_coords, ests[-2].max_over_coords
    if last == 0:
        return 0.0
    if prev <= 0 or last >= prev:
        return math.inf
    ratio = last / prev
    return last * ratio / (1 - ratio)
