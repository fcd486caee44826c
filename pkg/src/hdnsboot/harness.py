"""Monte Carlo experiments: Type I error grids, power curves and rate probes.

Every replication draws its data and bootstrap multipliers from streams keyed
by ``(config.seed, cell, rep, attempt)``, so a report depends only on the
configuration and never on ``workers`` or scheduling order.
"""
from __future__ import annotations

import csv
import json
import logging
import math
import time
from concurrent.futures import ProcessPoolExecutor
from dataclasses import asdict, dataclass, field, fields
from pathlib import Path
from typing import Optional, Union

import numpy as np

from . import bootstrap as bs
from .gaussian import empirical_kolmogorov, empirical_w2_1d, gaussian_w2
from .inference import (DesignError, combined_norm, run_combined_test, run_threshold_test)
from .models import (ModelSpec, generate_regression, simulate_batch, simulate_error_batch,
                     sparse_null_beta)
from .rng import derive_seed, generator

log = logging.getLogger(__name__)

KINDS = ("TYPE1_COMBINED", "TYPE1_THRESHOLD", "POWER_COMBINED", "POWER_THRESHOLD",
         "RATE_DELTA", "RATE_GA")
ALTERNATIVES = ("SPARSE", "UNIFORM")
CSV_COLUMNS = ["kind", "model", "n", "d", "alpha", "delta", "r", "rejection_rate", "mc_se", "reps"]
FAILURE_CAP = 0.01
_MAX_ATTEMPTS = 20
_BATCH = 500


class ExperimentAborted(RuntimeError):
    """More than 1% of replications in a cell failed."""


@dataclass
class ExperimentConfig:
    kind: str
    model: ModelSpec = field(default_factory=lambda: ModelSpec("M1", 500, 5))
    d_grid: list = field(default_factory=lambda: [5])
    alpha_grid: list = field(default_factory=lambda: [0.05, 0.10])
    reps: int = 2000
    B: int = 1000
    n: int = 500
    delta_grid: list = field(default_factory=list)
    alternative: str = "SPARSE"
    r_fraction: Union[float, list] = 0.0
    seed: int = 0
    workers: int = 1
    L: Union[int, str] = "auto"
    b_sigma: int = 200
    # rate probes
    n_grid: list = field(default_factory=list)
    target_reps: int = 2000
    m: int = 2000
    statistic: str = "sum"

    def __post_init__(self):
        if self.kind not in KINDS:
            raise ValueError(f"unknown experiment kind {self.kind!r}")
        if isinstance(self.model, dict):
            self.model = ModelSpec(**self.model)
        if self.reps < 1:
            raise ValueError("reps must be >= 1")
        if self.workers < 1:
            raise ValueError("workers must be >= 1")
        for n in self.n_values:
            for d in self.d_grid:
                if self.kind != "RATE_GA" and self.kind != "RATE_DELTA" and not 2 <= d < n:
                    raise ValueError(f"d={d} must satisfy 2 <= d < n={n}")
        if self.kind.startswith("POWER") and not self.delta_grid:
            raise ValueError("power experiments need a non-empty delta_grid")
        if self.alternative not in ALTERNATIVES:
            raise ValueError(f"alternative must be one of {ALTERNATIVES}")
        if self.statistic not in ("sum", "regression"):
            raise ValueError("statistic must be 'sum' or 'regression'")
        for r in self.r_fractions:
            if not 0 <= r <= 1:
                raise ValueError("r_fraction must lie in [0, 1]")

    @property
    def r_fractions(self) -> list:
        r = self.r_fraction
        return [float(v) for v in r] if isinstance(r, (list, tuple)) else [float(r)]

    @property
    def n_values(self) -> list:
        return list(self.n_grid) if self.n_grid else [self.n]

    def to_dict(self) -> dict:
        out = {f.name: getattr(self, f.name) for f in fields(self)}
        out["model"] = asdict(self.model)
        return out

    @classmethod
    def from_dict(cls, data: dict) -> "ExperimentConfig":
        data = dict(data)
        model = data.get("model")
        if isinstance(model, str):
            data["model"] = ModelSpec(model, data.get("n", 500), max(data.get("d_grid", [5])))
        return cls(**data)


@dataclass
class ExperimentReport:
    cells: list
    runtime_seconds: float
    config_echo: dict
    seed_ledger: list

    def to_dict(self) -> dict:
        return asdict(self)

    @classmethod
    def from_dict(cls, data: dict) -> "ExperimentReport":
        return cls(**data)


# --------------------------------------------------------------------------
# hypothesis-test experiments

def _cell_betas(kind: str, d: int, delta: float, r: int, alternative: str):
    """Return ``(beta_true, beta0)`` for one cell."""
    if kind.endswith("COMBINED"):
        beta0 = np.ones(d)
    else:
        beta0 = sparse_null_beta(d, r)
    beta = beta0.copy()
    if delta:
        if kind == "POWER_COMBINED" and alternative == "UNIFORM":
            beta = (1.0 + delta) * beta0
        else:
            beta[0] += delta
    return beta, beta0


def _rep_job(job: tuple) -> tuple:
    """Run one replication, retrying with fresh streams on a singular design.

    Returns ``(p_value, stream ids, failures)``.
    """
    cfg, n, d, delta, r, rep = job
    kind = cfg["kind"]
    model = ModelSpec(**{**cfg["model"], "n": n, "d": d, "seed": 0})
    beta, beta0 = _cell_betas(kind, d, delta, r, cfg["alternative"])
    ids = []
    for attempt in range(_MAX_ATTEMPTS):
        sid = f"{kind}|{model.model_id}|n={n}|d={d}|delta={delta!r}|r={r}|rep={rep}|attempt={attempt}"
        seed = derive_seed(cfg["seed"], sid)
        ids.append(f"{sid}|seed={seed:016x}")
        try:
            data = generate_regression(model.with_seed(seed), beta)
            if kind.endswith("COMBINED"):
                out = run_combined_test(data, beta0, cfg["alpha_grid"][0], cfg["L"], cfg["B"], seed)
            else:
                out = run_threshold_test(data, beta0, cfg["alpha_grid"][0], cfg["L"], cfg["B"],
                                         cfg["b_sigma"], seed)
            return out.p_value, ids, attempt
        except (DesignError, np.linalg.LinAlgError) as exc:
            log.warning("rep %s failed (%s); resampling", sid, exc)
    return None, ids, _MAX_ATTEMPTS


def _map(fn, jobs: list, workers: int) -> list:
    if workers == 1:
        return [fn(j) for j in jobs]
    with ProcessPoolExecutor(max_workers=workers) as pool:
        return list(pool.map(fn, jobs, chunksize=max(1, len(jobs) // (4 * workers))))


def _rejection_cells(config: ExperimentConfig, deltas: list) -> ExperimentReport:
    start = time.perf_counter()
    cfg = config.to_dict()
    cells, ledger = [], []
    threshold = config.kind.endswith("THRESHOLD")
    r_fracs = config.r_fractions if threshold else [None]
    for rf in r_fracs:
        for d in config.d_grid:
            r = int(round(rf * d)) if threshold else 0
            for delta in deltas:
                jobs = [(cfg, config.n, d, delta, r, rep) for rep in range(config.reps)]
                results = _map(_rep_job, jobs, config.workers)
                failures = sum(f for _, _, f in results)
                if failures > FAILURE_CAP * config.reps or any(p is None for p, _, _ in results):
                    raise ExperimentAborted(
                        f"{failures} failed replications in cell d={d}, delta={delta}, r={r}")
                pvals = np.array([p for p, _, _ in results])
                for _, ids, _ in results:
                    ledger.extend(ids)
                for alpha in config.alpha_grid:
                    rate = float(np.mean(pvals <= alpha))
                    cells.append({
                        "kind": config.kind, "model": config.model.model_id, "n": config.n,
                        "d": d, "alpha": float(alpha),
                        "delta": float(delta) if config.kind.startswith("POWER") else None,
                        "r": r if threshold else None,
                        "rejection_rate": rate,
                        "mc_se": math.sqrt(rate * (1.0 - rate) / config.reps),
                        "reps": config.reps,
                    })
    return ExperimentReport(cells=cells, runtime_seconds=time.perf_counter() - start,
                            config_echo=cfg, seed_ledger=ledger)


def run_type1(config: ExperimentConfig) -> ExperimentReport:
    """Rejection rates under the null for every ``(r, d, alpha)`` cell."""
    if not config.kind.startswith("TYPE1"):
        raise ValueError("run_type1 needs a TYPE1_* configuration")
    return _rejection_cells(config, [0.0])


def run_power(config: ExperimentConfig) -> ExperimentReport:
    """Rejection rates along the ``delta`` grid; ``delta = 0`` is the null."""
    if not config.kind.startswith("POWER"):
        raise ValueError("run_power needs a POWER_* configuration")
    return _rejection_cells(config, [float(v) for v in config.delta_grid])


# --------------------------------------------------------------------------
# rate probes

def _batched(seeds: list, fn) -> np.ndarray:
    return np.concatenate([fn(seeds[i:i + _BATCH]) for i in range(0, len(seeds), _BATCH)])


def sum_draws(spec: ModelSpec, seeds: list) -> np.ndarray:
    """``X_n / sqrt(n)`` for one series per seed, shape ``(len(seeds), d)``."""
    return _batched(seeds, lambda s: simulate_batch(spec, s).sum(axis=0) / math.sqrt(spec.n))


def null_estimator_draws(spec: ModelSpec, seeds: list) -> np.ndarray:
    """``sqrt(n) (beta_hat - beta)`` for one regression dataset per seed.

    Uses the identity ``sqrt(n)(beta_hat - beta) = (X'X/n)^{-1} X' eps / sqrt(n)``,
    so the value of ``beta`` never enters.
    """
    def one_batch(s):
        X = simulate_batch(spec, s)
        eps = simulate_error_batch(spec.n, s, burn_in=spec.burn_in)
        Xr = X.transpose(1, 2, 0)  # (reps, d, n)
        gram = Xr @ X.transpose(1, 0, 2) / spec.n
        score = (Xr @ eps.T[:, :, None])[..., 0] / math.sqrt(spec.n)
        return np.linalg.solve(gram, score[..., None])[..., 0]
    return _batched(seeds, one_batch)


def monte_carlo_target(spec: ModelSpec, reps: int, seed: int, statistic: str = "sum") -> np.ndarray:
    """Sample covariance of ``reps`` independent draws of the probed statistic."""
    seeds = [derive_seed(seed, "target", statistic, spec.model_id, spec.n, spec.d, i)
             for i in range(reps)]
    draws = sum_draws(spec, seeds) if statistic == "sum" else null_estimator_draws(spec, seeds)
    return np.atleast_2d(np.cov(draws, rowvar=False))


def rate_reference(n: int, d: int, L: int) -> float:
    """``d (sqrt(L/n) + 1/L)``."""
    return d * (math.sqrt(L / n) + 1.0 / L)


def run_rate_delta(config: ExperimentConfig) -> ExperimentReport:
    """Median covariance mismatch of the bootstrap against a Monte Carlo target.

    Windows are ``L = ceil(n^(1/3))``; ``config.reps`` replications per
    ``(n, d)`` and ``config.target_reps`` auxiliary series for the target.
    """
    if config.kind != "RATE_DELTA":
        raise ValueError("run_rate_delta needs a RATE_DELTA configuration")
    start = time.perf_counter()
    cells, ledger = [], []
    for n in config.n_values:
        for d in config.d_grid:
            spec = ModelSpec(**{**asdict(config.model), "n": n, "d": d, "seed": 0})
            target = monte_carlo_target(spec, config.target_reps, config.seed)
            L = math.ceil(n ** (1.0 / 3.0) - 1e-9)
            fro, mx = [], []
            seeds = []
            for rep in range(config.reps):
                sid = f"RATE_DELTA|{spec.model_id}|n={n}|d={d}|rep={rep}"
                seed = derive_seed(config.seed, sid)
                seeds.append(seed)
                ledger.append(f"{sid}|seed={seed:016x}")
            X = simulate_batch(spec, seeds)
            for rep in range(config.reps):
                cov = bs.conditional_covariance(bs.block_sums(X[:, rep, :], L))
                diag = bs.delta_diagnostics(target, cov)
                fro.append(diag.delta_frobenius)
                mx.append(diag.delta_max)
            ref = rate_reference(n, d, L)
            med = float(np.median(fro))
            cells.append({"kind": config.kind, "model": spec.model_id, "n": n, "d": d, "L": L,
                          "median_delta_frobenius": med, "median_delta_max": float(np.median(mx)),
                          "reference": ref, "ratio": med / ref, "reps": config.reps})
    return ExperimentReport(cells=cells, runtime_seconds=time.perf_counter() - start,
                            config_echo=config.to_dict(), seed_ledger=ledger)


GAUSS_FACTOR = 4


def _probe_norm(v: np.ndarray) -> np.ndarray:
    return np.abs(v[:, 0]) if v.shape[1] == 1 else combined_norm(v)


def ga_distances(draws: np.ndarray, seed: int, gauss_factor: int = GAUSS_FACTOR) -> dict:
    """Distances between draws and Gaussian draws with the matching sample covariance.

    The Gaussian side has ``gauss_factor`` times as many draws, which lowers
    the sampling floor of the Kolmogorov distance; W2 uses an equal-size subset.
    """
    m, d = draws.shape
    cov = np.atleast_2d(np.cov(draws, rowvar=False))
    z = generator(seed, "matched-gaussian").standard_normal((gauss_factor * m, d))
    vals, vecs = np.linalg.eigh(cov)
    gauss = z @ (vecs * np.sqrt(np.maximum(vals, 0.0))) @ vecs.T
    return {
        "kolmogorov": empirical_kolmogorov(_probe_norm(draws), _probe_norm(gauss)),
        "w2_1d": empirical_w2_1d(draws[:, 0], gauss[:m, 0]),
        "sample_cov": cov,
    }


def run_rate_ga(config: ExperimentConfig) -> ExperimentReport:
    """Gaussian-approximation probe along ``n_grid``.

    Draws ``config.m`` values of the probed statistic (``X_n / sqrt(n)`` or
    the null OLS error ``sqrt(n)(beta_hat - beta)``), compares its combined
    norm with that of matched Gaussian draws in Kolmogorov distance, and
    reports the Gaussian W2 distance between the fitted covariance and a Monte
    Carlo target.
    """
    if config.kind != "RATE_GA":
        raise ValueError("run_rate_ga needs a RATE_GA configuration")
    start = time.perf_counter()
    cells, ledger = [], []
    for n in config.n_values:
        for d in config.d_grid:
            spec = ModelSpec(**{**asdict(config.model), "n": n, "d": d, "seed": 0})
            sid = f"RATE_GA|{config.statistic}|{spec.model_id}|n={n}|d={d}"
            seeds = [derive_seed(config.seed, sid, i) for i in range(config.m)]
            ledger.append(f"{sid}|draws={config.m}")
            draws = (sum_draws(spec, seeds) if config.statistic == "sum"
                     else null_estimator_draws(spec, seeds))
            dist = ga_distances(draws, derive_seed(config.seed, sid, "gaussian"))
            target = monte_carlo_target(spec, config.target_reps, config.seed, config.statistic)
            cells.append({"kind": config.kind, "model": spec.model_id, "n": n, "d": d,
                          "statistic": config.statistic, "kolmogorov": dist["kolmogorov"],
                          "w2_1d": dist["w2_1d"],
                          "w2_gaussian": gaussian_w2(dist["sample_cov"], target),
                          "reps": config.m})
    return ExperimentReport(cells=cells, runtime_seconds=time.perf_counter() - start,
                            config_echo=config.to_dict(), seed_ledger=ledger)


RUNNERS = {
    "TYPE1_COMBINED": run_type1, "TYPE1_THRESHOLD": run_type1,
    "POWER_COMBINED": run_power, "POWER_THRESHOLD": run_power,
    "RATE_DELTA": run_rate_delta, "RATE_GA": run_rate_ga,
}


def run_experiment(config: ExperimentConfig) -> ExperimentReport:
    return RUNNERS[config.kind](config)


# --------------------------------------------------------------------------
# reports

def _csv_value(v):
    if v is None:
        return ""
    if isinstance(v, float):
        return repr(v)
    return v


def emit_report(report: ExperimentReport, fmt: str, path) -> None:
    """Write ``report`` as CSV (one row per cell) or JSON (the full record)."""
    path = Path(path)
    fmt = fmt.upper()
    if fmt == "JSON":
        path.write_text(json.dumps(report.to_dict(), indent=2))
        return
    if fmt != "CSV":
        raise ValueError("format must be CSV or JSON")
    extra = []
    for cell in report.cells:
        extra.extend(k for k in cell if k not in CSV_COLUMNS and k not in extra)
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(CSV_COLUMNS + extra)
        for cell in report.cells:
            writer.writerow([_csv_value(cell.get(k)) for k in CSV_COLUMNS + extra])


def load_report(path) -> ExperimentReport:
    return ExperimentReport.from_dict(json.loads(Path(path).read_text()))


def read_csv_report(path) -> list:
    """Parse a CSV report back into cell dicts (numbers as float/int, blanks as None)."""
    def parse(v: str):
        if v == "":
            return None
        for cast in (int, float):
            try:
                return cast(v)
            except ValueError:
                pass
        return v
    with open(path, newline="") as fh:
        return [{k: parse(v) for k, v in row.items()} for row in csv.DictReader(fh)]
