"""Non-stationary time series models M1-M5 and the regression design.

All five models share the recursion ``x_i = a(i) * A @ x_{i-1} + e_i`` started
from the zero vector ``burn_in`` steps before the first retained index. The
scalar coefficient ``a(i)`` depends on the rescaled time ``i / n`` with ``i``
counted from 1 to ``n``; burn-in steps reuse the ``i = 1`` coefficient. ``A``
is the identity except for M2, where it is tridiagonal.

Innovations are addressed by absolute time index through
:class:`hdnsboot.rng.CounterStream`, so the innovation at time ``t`` is the
same regardless of how long the burn-in is or whether it is drawn alone.
"""
from __future__ import annotations

from dataclasses import dataclass, replace
from typing import Optional

import numpy as np
from scipy.special import chdtri, ndtri

from .rng import CounterStream

MODEL_IDS = ("M1", "M2", "M3", "M4", "M5", "REGRESSION")
SERIES_MODELS = ("M1", "M2", "M3", "M4", "M5")

# Absolute time t (which may be negative during burn-in) sits at stream
# position (t + _TIME_OFFSET) * width + coordinate.
_TIME_OFFSET = 1 << 32
_MAX_BURN_IN = 1 << 30


class ModelError(ValueError):
    """Invalid model specification or a non-finite simulation."""


@dataclass(frozen=True)
class ModelSpec:
    model_id: str
    n: int
    d: int
    seed: int = 0
    burn_in: int = 200
    t_df: float = 5.0
    band_value: float = 0.2
    beta: Optional[tuple] = None

    def __post_init__(self):
        if self.model_id not in MODEL_IDS:
            raise ModelError(f"unknown model_id {self.model_id!r}; expected one of {MODEL_IDS}")
        if int(self.n) != self.n or self.n < 2:
            raise ModelError("n must be an integer >= 2")
        if int(self.d) != self.d or self.d < 1:
            raise ModelError("d must be an integer >= 1")
        if int(self.burn_in) != self.burn_in or not 0 <= self.burn_in <= _MAX_BURN_IN:
            raise ModelError("burn_in must be a non-negative integer")
        if self.model_id == "M5" and not self.t_df > 2:
            raise ModelError("M5 requires t_df > 2 for finite innovation variance")
        if self.model_id == "REGRESSION" and self.d >= self.n:
            raise ModelError("regression designs require d < n")
        if not 0 <= int(self.seed) < 1 << 64:
            raise ModelError("seed must be a 64-bit unsigned integer")
        if self.beta is not None and len(self.beta) != self.d:
            raise ModelError("beta must have length d")

    def with_seed(self, seed: int) -> "ModelSpec":
        return replace(self, seed=int(seed))


@dataclass
class TimeSeriesMatrix:
    """An ``n x d`` series; row ``i`` holds the observation at time ``i + 1``."""

    data: np.ndarray

    def __post_init__(self):
        self.data = np.asarray(self.data, dtype=np.float64)
        if self.data.ndim == 1:
            self.data = self.data[:, None]
        if self.data.ndim != 2:
            raise ModelError("series data must be a 2-d array")
        if not np.all(np.isfinite(self.data)):
            raise ModelError("series contains non-finite values")

    @property
    def n(self) -> int:
        return self.data.shape[0]

    @property
    def d(self) -> int:
        return self.data.shape[1]


@dataclass
class RegressionDataset:
    X: TimeSeriesMatrix
    y: np.ndarray
    beta_true: np.ndarray
    eps: np.ndarray

    @property
    def n(self) -> int:
        return self.X.n

    @property
    def d(self) -> int:
        return self.X.d


def _clamped_times(n: int, burn_in: int) -> np.ndarray:
    t = np.arange(1 - burn_in, n + 1)
    return np.maximum(t, 1)


def ar_coefficients(model_id: str, n: int, burn_in: int = 0) -> np.ndarray:
    """Scalar AR coefficient ``a(i)`` for every simulated step.

    Returns ``burn_in + n`` values; the first ``burn_in`` repeat ``a(1)``.
    """
    u = _clamped_times(n, burn_in) / n
    cos = np.cos(2 * np.pi * u)
    if model_id in ("M1", "M2", "M5"):
        return 0.6 * cos
    if model_id == "M3":
        return np.where(u < 0.75, 0.25 * cos, u - 0.3)
    if model_id == "M4":
        return np.select(
            [u < 0.25, u < 0.6],
            [0.25 * cos, u - 0.6],
            0.6 * np.exp(-50.0 * (u - 0.75) ** 2),
        )
    raise ModelError(f"{model_id!r} is not a time series model")


def band_matrix(d: int, band_value: float = 0.2) -> np.ndarray:
    """Tridiagonal matrix with unit diagonal and ``band_value`` off the diagonal."""
    A = np.eye(d)
    idx = np.arange(d - 1)
    A[idx, idx + 1] = band_value
    A[idx + 1, idx] = band_value
    return A


def transition_matrix(spec: ModelSpec) -> Optional[np.ndarray]:
    """The cross-sectional matrix ``A``; ``None`` stands for the identity."""
    if spec.model_id == "M2":
        return band_matrix(spec.d, spec.band_value)
    return None


def error_coefficients(n: int, burn_in: int = 0) -> np.ndarray:
    """Coefficients ``14 (i/n)^2 (1 - i/n)^2 - 0.5`` of the regression error AR recursion."""
    u = _clamped_times(n, burn_in) / n
    return 14.0 * u**2 * (1.0 - u) ** 2 - 0.5


def innovation_width(spec: ModelSpec) -> int:
    # M5 spends one extra uniform per time step on the shared chi-square mixing variable.
    return spec.d + 1 if spec.model_id == "M5" else spec.d


def innovations(spec: ModelSpec, t_start: int, t_stop: int, tag: str = "innovation") -> np.ndarray:
    """Innovation vectors for absolute times ``t_start <= t < t_stop``.

    Gaussian models draw i.i.d. standard normals. M5 draws a multivariate t
    vector ``z / sqrt(w / nu)`` with one ``w ~ chi2(nu)`` shared across
    coordinates, rescaled to unit variance by ``sqrt((nu - 2) / nu)``.
    ``tag="innovation-copy"`` addresses the independent copy used by coupling
    arguments.
    """
    if t_start < -_TIME_OFFSET or t_stop < t_start:
        raise ModelError("invalid time range")
    width = innovation_width(spec)
    stream = CounterStream(spec.seed, tag)
    steps = t_stop - t_start
    if spec.model_id != "M5":
        return stream.normals((t_start + _TIME_OFFSET) * width, steps * width).reshape(steps, width)
    u = stream.uniforms((t_start + _TIME_OFFSET) * width, steps * width).reshape(steps, width)
    z = ndtri(u[:, : spec.d])
    nu = float(spec.t_df)
    w = chdtri(nu, u[:, spec.d])
    return z / np.sqrt(w / nu)[:, None] * np.sqrt((nu - 2.0) / nu)


def run_recursion(coefs: np.ndarray, shocks: np.ndarray, A: Optional[np.ndarray] = None,
                  x0=None) -> np.ndarray:
    """Iterate ``x_t = coefs[t] * A @ x_{t-1} + shocks[t]``.

    ``shocks`` has shape ``(T, ..., d)``; leading batch dimensions after the
    time axis are carried along, which lets coupled simulations run many
    replications at once. Returns the full path of shape ``shocks.shape``.
    """
    shocks = np.asarray(shocks, dtype=np.float64)
    out = np.empty_like(shocks)
    x = np.zeros(shocks.shape[1:]) if x0 is None else np.array(x0, dtype=np.float64)
    for t in range(shocks.shape[0]):
        prev = x if A is None else x @ A.T
        x = coefs[t] * prev + shocks[t]
        out[t] = x
    return out


def simulate_model(spec: ModelSpec, shocks: Optional[np.ndarray] = None) -> TimeSeriesMatrix:
    """Simulate ``spec.n`` retained observations of one of M1-M5.

    Parameters
    ----------
    spec : ModelSpec
        Model, dimensions, burn-in and seed.
    shocks : array, optional
        Override for the ``(burn_in + n, d)`` innovation block, mainly for
        tests (e.g. all zeros). By default innovations come from the seeded
        counter stream.
    """
    if spec.model_id not in SERIES_MODELS:
        raise ModelError(f"simulate_model needs one of {SERIES_MODELS}, got {spec.model_id!r}")
    steps = spec.burn_in + spec.n
    if shocks is None:
        shocks = innovations(spec, 1 - spec.burn_in, spec.n + 1)
    else:
        shocks = np.asarray(shocks, dtype=np.float64)
        if shocks.shape != (steps, spec.d):
            raise ModelError(f"shocks must have shape {(steps, spec.d)}")
    path = run_recursion(ar_coefficients(spec.model_id, spec.n, spec.burn_in), shocks,
                         transition_matrix(spec))
    data = path[spec.burn_in:]
    if not np.all(np.isfinite(data)):
        raise ModelError("simulation produced non-finite values; check the model coefficients")
    return TimeSeriesMatrix(data)


def simulate_error_process(n: int, seed: int, burn_in: int = 200,
                           shocks: Optional[np.ndarray] = None) -> np.ndarray:
    """Regression errors ``eps_i = [14 (i/n)^2 (1-i/n)^2 - 0.5] eps_{i-1} + eta_i``."""
    if int(n) != n or n < 2:
        raise ModelError("n must be an integer >= 2")
    if shocks is None:
        stream = CounterStream(seed, "error")
        shocks = stream.normals(1 - burn_in + _TIME_OFFSET, burn_in + n)
    else:
        shocks = np.asarray(shocks, dtype=np.float64)
        if shocks.shape != (burn_in + n,):
            raise ModelError(f"shocks must have shape {(burn_in + n,)}")
    return run_recursion(error_coefficients(n, burn_in), shocks)[burn_in:]


def generate_regression(spec: ModelSpec, beta=None, error_seed: Optional[int] = None) -> RegressionDataset:
    """Build ``y = X beta + eps`` with predictors from ``spec`` and AR errors.

    The errors use their own stream (tag ``"error"``) keyed by ``error_seed``,
    which defaults to ``spec.seed``; changing it leaves ``X`` untouched.
    """
    if beta is None:
        beta = spec.beta
    if beta is None:
        raise ModelError("beta must be given either directly or through spec.beta")
    beta = np.asarray(beta, dtype=np.float64).reshape(-1)
    if beta.shape != (spec.d,):
        raise ModelError(f"beta has length {beta.size}, expected d={spec.d}")
    if not np.all(np.isfinite(beta)):
        raise ModelError("beta must be finite")
    X = simulate_model(spec)
    eps = simulate_error_process(spec.n, spec.seed if error_seed is None else error_seed,
                                 burn_in=spec.burn_in)
    y = X.data @ beta + eps
    return RegressionDataset(X=X, y=y, beta_true=beta, eps=eps)


def sparse_null_beta(d: int, r: int) -> np.ndarray:
    """``[0_r, 1_{d-r}]``: the first ``r`` coefficients are zero, the rest one."""
    if not 0 <= r <= d:
        raise ValueError("r must lie in [0, d]")
    beta = np.ones(d)
    beta[:r] = 0.0
    return beta


def sum_covariance(spec: ModelSpec) -> np.ndarray:
    """Exact ``Cov(X_n / sqrt(n))`` for the linear models with unit-variance innovations.

    Propagates the state covariance ``P``, the cross covariance ``R`` between
    the running sum and the current state, and the running-sum covariance
    ``V`` through the recursion. Used as an analytic check on Monte Carlo
    covariance targets.
    """
    coefs = ar_coefficients(spec.model_id, spec.n, spec.burn_in)
    A = transition_matrix(spec)
    A = np.eye(spec.d) if A is None else A
    I = np.eye(spec.d)
    P = np.zeros((spec.d, spec.d))
    R = np.zeros_like(P)
    V = np.zeros_like(P)
    for t, a in enumerate(coefs):
        C = a * A
        P = C @ P @ C.T + I
        if t < spec.burn_in:
            continue
        cross = R @ C.T
        V = V + cross + cross.T + P
        R = cross + P
    return V / spec.n


def simulate_batch(spec: ModelSpec, seeds) -> np.ndarray:
    """Simulate one series per seed at once; returns shape ``(n, len(seeds), d)``.

    Each replication uses the same innovation stream as ``simulate_model`` with
    that seed; only the recursion is vectorized across replications.
    """
    if spec.model_id not in SERIES_MODELS:
        raise ModelError(f"simulate_batch needs one of {SERIES_MODELS}")
    shocks = np.stack([innovations(spec.with_seed(s), 1 - spec.burn_in, spec.n + 1)
                       for s in seeds], axis=1)
    path = run_recursion(ar_coefficients(spec.model_id, spec.n, spec.burn_in), shocks,
                         transition_matrix(spec))
    return path[spec.burn_in:]


def simulate_error_batch(n: int, seeds, burn_in: int = 200) -> np.ndarray:
    """Error processes for several seeds, shape ``(n, len(seeds))``."""
    shocks = np.stack([CounterStream(s, "error").normals(1 - burn_in + _TIME_OFFSET, burn_in + n)
                       for s in seeds], axis=1)
    return run_recursion(error_coefficients(n, burn_in), shocks)[burn_in:]
