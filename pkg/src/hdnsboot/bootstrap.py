"""Block sums, Gaussian multiplier bootstrap and covariance diagnostics."""
from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Optional, Sequence

import numpy as np

from .models import TimeSeriesMatrix
from .rng import generator

# Rolling sums are rebuilt from scratch every _RESYNC rows so cumulative-sum
# round-off never accumulates over more than _RESYNC + L terms.
_RESYNC = 1024
DEFAULT_GRID_FACTORS = (0.5, 0.75, 1.0, 1.5, 2.0, 3.0)


@dataclass
class BlockSums:
    psi: np.ndarray
    L: int

    @property
    def n(self) -> int:
        return self.psi.shape[0] + self.L - 1

    @property
    def d(self) -> int:
        return self.psi.shape[1]

    @property
    def m(self) -> int:
        """Number of blocks, ``n - L + 1``."""
        return self.psi.shape[0]


@dataclass
class BootstrapDraws:
    draws: np.ndarray
    L: int
    B: int
    seed: int
    scaled: bool = True


@dataclass
class CovarianceDiagnostics:
    delta_frobenius: float
    delta_max: float
    sigma_target: np.ndarray = field(repr=False)
    sigma_boot: np.ndarray = field(repr=False)


def _as_array(X) -> np.ndarray:
    if isinstance(X, TimeSeriesMatrix):
        return X.data
    X = np.asarray(X, dtype=np.float64)
    return X[:, None] if X.ndim == 1 else X


def block_sums(X, L: int) -> BlockSums:
    """Overlapping block sums ``psi_i = (x_i + ... + x_{i+L-1}) / sqrt(L)``."""
    x = _as_array(X)
    n = x.shape[0]
    if int(L) != L or not 1 <= L <= n:
        raise ValueError(f"window L={L} must be an integer in [1, n={n}]")
    L = int(L)
    m = n - L + 1
    if L == 1:
        return BlockSums(psi=x.copy(), L=1)
    psi = np.empty((m, x.shape[1]))
    for start in range(0, m, _RESYNC):
        stop = min(start + _RESYNC, m)
        seg = x[start:stop + L - 1]
        csum = np.zeros((seg.shape[0] + 1, x.shape[1]))
        np.cumsum(seg, axis=0, out=csum[1:])
        psi[start:stop] = csum[L:] - csum[:-L]
    psi /= math.sqrt(L)
    return BlockSums(psi=psi, L=L)


def multiplier_draw(psi: BlockSums, multipliers) -> np.ndarray:
    """Unscaled bootstrap vector ``tau = sum_i multipliers_i * psi_i``."""
    w = np.asarray(multipliers, dtype=np.float64)
    if w.shape != (psi.m,):
        raise ValueError(f"expected {psi.m} multipliers, got shape {w.shape}")
    return w @ psi.psi


def draw_multipliers(seed: int, B: int, m: int, tag: str = "multipliers") -> np.ndarray:
    """``B x m`` i.i.d. standard normal multipliers from the ``(seed, tag)`` stream."""
    return generator(seed, tag).standard_normal((B, m))


def bootstrap_sample(X, L: int, B: int, seed: int, tag: str = "multipliers",
                     psi: Optional[BlockSums] = None) -> BootstrapDraws:
    """``B`` draws of ``tau_{n,L} / sqrt(n - L + 1)``.

    Conditionally on the data each draw is Gaussian with covariance
    :func:`conditional_covariance`.
    """
    if int(B) != B or B < 1:
        raise ValueError("B must be a positive integer")
    if psi is None:
        psi = block_sums(X, L)
    weights = draw_multipliers(seed, int(B), psi.m, tag)
    draws = (weights @ psi.psi) / math.sqrt(psi.m)
    return BootstrapDraws(draws=draws, L=psi.L, B=int(B), seed=int(seed))


def conditional_covariance(psi: BlockSums) -> np.ndarray:
    """Exact ``Cov[tau / sqrt(n - L + 1) | data] = psi' psi / (n - L + 1)``."""
    return psi.psi.T @ psi.psi / psi.m


def _check_square(a: np.ndarray, name: str) -> np.ndarray:
    a = np.atleast_2d(np.asarray(a, dtype=np.float64))
    if a.ndim != 2 or a.shape[0] != a.shape[1]:
        raise ValueError(f"{name} must be a square matrix")
    return a


def delta_diagnostics(sigma_target, sigma_boot) -> CovarianceDiagnostics:
    """Frobenius and entry-wise max norms of ``sigma_target - sigma_boot``."""
    a = _check_square(sigma_target, "sigma_target")
    b = _check_square(sigma_boot, "sigma_boot")
    if a.shape != b.shape:
        raise ValueError(f"dimension mismatch: {a.shape} vs {b.shape}")
    diff = a - b
    return CovarianceDiagnostics(
        delta_frobenius=float(np.linalg.norm(diff, "fro")),
        delta_max=float(np.max(np.abs(diff))),
        sigma_target=a,
        sigma_boot=b,
    )


def default_block_grid(n: int, factors: Sequence[float] = DEFAULT_GRID_FACTORS) -> list:
    """Sorted distinct windows ``ceil(c * n^(1/3))`` clipped to ``[1, n]``."""
    base = n ** (1.0 / 3.0)
    return sorted({min(n, max(1, math.ceil(c * base - 1e-9))) for c in factors})


def volatility_scores(X, candidates: Sequence[int]) -> np.ndarray:
    """Mean Frobenius distance between each candidate's bootstrap covariance and its grid neighbours."""
    covs = [conditional_covariance(block_sums(X, L)) for L in candidates]
    k = len(covs)
    if k == 1:
        return np.zeros(1)
    steps = np.array([np.linalg.norm(covs[i + 1] - covs[i], "fro") for i in range(k - 1)])
    scores = np.empty(k)
    scores[0] = steps[0]
    scores[-1] = steps[-1]
    scores[1:-1] = 0.5 * (steps[:-1] + steps[1:])
    return scores


def select_block_size(X, candidates: Optional[Sequence[int]] = None) -> int:
    """Minimal-volatility choice of the window ``L``.

    The bootstrap covariance is computed for every candidate window and the
    window where it changes least between neighbouring grid points wins; ties
    go to the smaller window. With three or more candidates the largest one
    only serves as a neighbour: its stability is never checked from above, so
    a noisy last step would otherwise pull the choice to the edge of the grid.
    Without ``candidates`` the grid is :func:`default_block_grid`, which scales
    with ``n^(1/3)``.
    """
    x = _as_array(X)
    if candidates is None:
        candidates = default_block_grid(x.shape[0])
    candidates = sorted({int(L) for L in candidates})
    if not candidates:
        raise ValueError("candidate list is empty")
    for L in candidates:
        if not 1 <= L <= x.shape[0]:
            raise ValueError(f"candidate window {L} outside [1, {x.shape[0]}]")
    scores = volatility_scores(x, candidates)
    if len(candidates) >= 3:
        scores[-1] = np.inf
    return candidates[int(np.argmin(scores))]
