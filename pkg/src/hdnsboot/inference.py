"""OLS inference with multiplier-bootstrap critical values.

Two tests of ``H0: beta = beta0`` in ``y_i = x_i' beta + eps_i``:

* the combined test, whose statistic is the larger of the sup-norm and the
  Euclidean norm of ``sqrt(n) (beta_hat - beta0)``, normalized by
  ``sqrt(2 log d)`` and ``sqrt(d)`` respectively;
* the threshold test, the sup-norm of the soft-thresholded estimate.

Both are calibrated by bootstrapping ``G_n``, the multiplier bootstrap of the
score series ``z_i = (X'X/n)^{-1} x_i eps_hat_i``.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field, replace
from typing import Optional, Union

import numpy as np
from scipy import linalg

from .bootstrap import BlockSums, block_sums, bootstrap_sample, select_block_size
from .models import RegressionDataset, TimeSeriesMatrix

MAX_CONDITION = 1e12
DEFAULT_B_SIGMA = 200


class DesignError(ValueError):
    """Singular, ill-conditioned or mis-shaped regression design."""


@dataclass
class OlsFit:
    beta_hat: np.ndarray
    residuals: np.ndarray
    gram_inv: np.ndarray
    condition_estimate: float


@dataclass
class ThresholdConfig:
    lam: np.ndarray
    sigma_hat: np.ndarray
    b_sigma: int


@dataclass
class TestOutcome:
    statistic: float
    boot_draws: np.ndarray = field(repr=False)
    critical_value: float
    p_value: float
    alpha: float
    reject: bool
    meta: dict = field(default_factory=dict)

    __test__ = False  # not a pytest class

    def with_alpha(self, alpha: float) -> "TestOutcome":
        """Re-decide at another level using the same bootstrap draws."""
        return replace(self, alpha=float(alpha),
                       critical_value=critical_value(self.boot_draws, alpha),
                       reject=bool(self.p_value <= alpha))

    def to_dict(self) -> dict:
        return {
            "statistic": self.statistic,
            "boot_draws": [float(v) for v in self.boot_draws],
            "critical_value": self.critical_value,
            "p_value": self.p_value,
            "alpha": self.alpha,
            "reject": self.reject,
            "meta": dict(self.meta),
        }


def _unpack(data):
    if isinstance(data, RegressionDataset):
        return data.X.data, np.asarray(data.y, dtype=np.float64)
    X, y = data
    if isinstance(X, TimeSeriesMatrix):
        X = X.data
    X = np.asarray(X, dtype=np.float64)
    if X.ndim == 1:
        X = X[:, None]
    return X, np.asarray(y, dtype=np.float64).reshape(-1)


def ols_fit(data) -> OlsFit:
    """Least squares through a Cholesky solve of the normal equations.

    ``data`` is a :class:`RegressionDataset` or an ``(X, y)`` pair.
    """
    X, y = _unpack(data)
    n, d = X.shape
    if y.shape != (n,):
        raise DesignError(f"y has shape {y.shape}, expected ({n},)")
    if d >= n:
        raise DesignError(f"OLS needs d < n, got d={d}, n={n}")
    gram = X.T @ X / n
    eig = np.linalg.eigvalsh(gram)
    if eig[0] <= 0 or eig[-1] / eig[0] > MAX_CONDITION:
        raise DesignError("design matrix is singular or ill-conditioned")
    try:
        factor = linalg.cho_factor(gram)
    except linalg.LinAlgError as exc:
        raise DesignError("design matrix is not positive definite") from exc
    beta_hat = linalg.cho_solve(factor, X.T @ y / n)
    gram_inv = linalg.cho_solve(factor, np.eye(d))
    return OlsFit(
        beta_hat=beta_hat,
        residuals=y - X @ beta_hat,
        gram_inv=0.5 * (gram_inv + gram_inv.T),
        condition_estimate=float(eig[-1] / eig[0]),
    )


def score_series(fit: OlsFit, X) -> np.ndarray:
    """Rows ``z_i = (X'X/n)^{-1} x_i eps_hat_i``."""
    X = X.data if isinstance(X, TimeSeriesMatrix) else np.asarray(X, dtype=np.float64)
    return (X * fit.residuals[:, None]) @ fit.gram_inv


def _combined(v: np.ndarray, d: int) -> np.ndarray:
    v = np.atleast_2d(v)
    sup = np.max(np.abs(v), axis=1) / math.sqrt(2.0 * math.log(d))
    l2 = np.linalg.norm(v, axis=1) / math.sqrt(d)
    return np.maximum(sup, l2)


def combined_norm(v) -> np.ndarray:
    """``max(|v|_inf / sqrt(2 log d), |v|_2 / sqrt(d))`` row-wise."""
    v = np.atleast_2d(np.asarray(v, dtype=np.float64))
    d = v.shape[1]
    if d < 2:
        raise ValueError("the combined norm needs d >= 2")
    return _combined(v, d)


def combined_statistic(beta_hat, beta0, n: int, d: Optional[int] = None) -> float:
    diff = np.asarray(beta_hat, dtype=np.float64) - np.asarray(beta0, dtype=np.float64)
    d = diff.size if d is None else d
    if d < 2:
        raise ValueError("the combined statistic needs d >= 2")
    if diff.size != d:
        raise ValueError("beta length does not match d")
    return float(combined_norm(math.sqrt(n) * diff)[0])


def _resolve_L(Z: np.ndarray, L) -> int:
    if L is None or L == "auto":
        return select_block_size(Z)
    return int(L)


def bootstrap_g(fit: OlsFit, X, L, B: int, seed: int, tag: str,
                psi: Optional[BlockSums] = None) -> np.ndarray:
    """``B x d`` draws of the bootstrap analogue ``G_n`` of ``sqrt(n) (beta_hat - beta)``."""
    if psi is None:
        Z = score_series(fit, X)
        psi = block_sums(Z, _resolve_L(Z, L))
    return bootstrap_sample(None, psi.L, B, seed, tag=tag, psi=psi).draws


def combined_bootstrap(fit: OlsFit, X, L, B: int, seed: int) -> np.ndarray:
    """``B`` bootstrap replicates of the combined statistic."""
    g = bootstrap_g(fit, X, L, B, seed, tag="combined-multipliers")
    return combined_norm(g)


def critical_value(draws, alpha: float) -> float:
    """The ``ceil((1 - alpha) B)``-th order statistic of the draws."""
    if not 0 < alpha < 1:
        raise ValueError("alpha must lie in (0, 1)")
    s = np.sort(np.asarray(draws, dtype=np.float64))
    k = math.ceil((1.0 - alpha) * s.size - 1e-9)
    return float(s[min(max(k, 1), s.size) - 1])


def p_value(statistic: float, draws) -> float:
    draws = np.asarray(draws)
    return float((1 + np.count_nonzero(draws >= statistic)) / (draws.size + 1))


def _outcome(stat: float, draws: np.ndarray, alpha: float, meta: dict) -> TestOutcome:
    p = p_value(stat, draws)
    return TestOutcome(statistic=float(stat), boot_draws=np.sort(draws),
                       critical_value=critical_value(draws, alpha), p_value=p,
                       alpha=float(alpha), reject=bool(p <= alpha), meta=meta)


def run_combined_test(data, beta0, alpha: float = 0.05, L: Union[int, str, None] = "auto",
                      B: int = 1000, seed: int = 0) -> TestOutcome:
    X, y = _unpack(data)
    n, d = X.shape
    if d < 2:
        raise DesignError("the combined test needs d >= 2")
    beta0 = np.asarray(beta0, dtype=np.float64).reshape(-1)
    fit = ols_fit((X, y))
    Z = score_series(fit, X)
    L = _resolve_L(Z, L)
    stat = combined_statistic(fit.beta_hat, beta0, n, d)
    draws = combined_norm(bootstrap_g(fit, X, L, B, seed, tag="combined-multipliers",
                                      psi=block_sums(Z, L)))
    return _outcome(stat, draws, alpha, {"L": L, "B": int(B), "seed": int(seed), "test": "combined"})


def soft_threshold(x, lam):
    """``sign(x) (|x| - lam)`` where ``|x| >= lam``, zero elsewhere."""
    lam = np.asarray(lam, dtype=np.float64)
    if np.any(lam < 0):
        raise ValueError("threshold must be non-negative")
    x = np.asarray(x, dtype=np.float64)
    out = np.sign(x) * np.maximum(np.abs(x) - lam, 0.0)
    return float(out) if out.ndim == 0 else out


def threshold_from_sigma(sigma_hat, n: int) -> np.ndarray:
    return np.asarray(sigma_hat, dtype=np.float64) * math.sqrt(2.0 * math.log(n) / n)


def estimate_sigma_hat(fit: OlsFit, X, L, b_sigma: int = DEFAULT_B_SIGMA, seed: int = 0,
                       psi: Optional[BlockSums] = None) -> ThresholdConfig:
    """Bootstrap standard deviations of ``beta_hat`` and the implied thresholds.

    Uses its own multiplier stream, independent of the draws that calibrate the
    test statistic.
    """
    if int(b_sigma) != b_sigma or b_sigma < 50:
        raise ValueError("b_sigma must be an integer >= 50")
    X = X.data if isinstance(X, TimeSeriesMatrix) else np.asarray(X, dtype=np.float64)
    n = X.shape[0]
    g = bootstrap_g(fit, X, L, int(b_sigma), seed, tag="sigma-multipliers", psi=psi)
    sigma_hat = np.std(g / math.sqrt(n), axis=0, ddof=1)
    return ThresholdConfig(lam=threshold_from_sigma(sigma_hat, n), sigma_hat=sigma_hat,
                           b_sigma=int(b_sigma))


def threshold_statistic(beta_hat, beta0, lam, n: int) -> float:
    shrunk = soft_threshold(np.asarray(beta_hat, dtype=np.float64), lam)
    return float(math.sqrt(n) * np.max(np.abs(shrunk - beta0)))


def threshold_bootstrap(g: np.ndarray, beta0, lam, n: int) -> np.ndarray:
    """Replicates ``sqrt(n) |(beta0 + G/sqrt(n))^ST - beta0|_inf`` per row of ``g``."""
    shifted = np.asarray(beta0)[None, :] + g / math.sqrt(n)
    return math.sqrt(n) * np.max(np.abs(soft_threshold(shifted, lam) - beta0), axis=1)


def run_threshold_test(data, beta0, alpha: float = 0.05, L: Union[int, str, None] = "auto",
                       B: int = 1000, b_sigma: int = DEFAULT_B_SIGMA, seed: int = 0) -> TestOutcome:
    X, y = _unpack(data)
    n, d = X.shape
    beta0 = np.asarray(beta0, dtype=np.float64).reshape(-1)
    if beta0.shape != (d,):
        raise DesignError("beta0 length does not match d")
    fit = ols_fit((X, y))
    Z = score_series(fit, X)
    L = _resolve_L(Z, L)
    psi = block_sums(Z, L)
    cfg = estimate_sigma_hat(fit, X, L, b_sigma, seed, psi=psi)
    stat = threshold_statistic(fit.beta_hat, beta0, cfg.lam, n)
    g = bootstrap_g(fit, X, L, B, seed, tag="threshold-multipliers", psi=psi)
    draws = threshold_bootstrap(g, beta0, cfg.lam, n)
    meta = {"L": L, "B": int(B), "seed": int(seed), "test": "threshold",
            "b_sigma": cfg.b_sigma, "lambda": [float(v) for v in cfg.lam]}
    return _outcome(stat, draws, alpha, meta)
