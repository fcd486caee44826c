"""Gaussian comparison tools: SPD roots, couplings, distances and bounds."""
from __future__ import annotations

import math
import warnings
from dataclasses import dataclass

import numpy as np

from .rng import generator

SYMMETRY_TOL = 1e-8
NEGATIVE_TOL = 1e-10
CLIP_FLOOR = 1e-12


class NotSPDError(ValueError):
    pass


@dataclass(frozen=True)
class SpdMatrix:
    """Symmetric positive definite matrix, validated and symmetrized on construction."""

    entries: np.ndarray

    def __post_init__(self):
        a = np.atleast_2d(np.asarray(self.entries, dtype=np.float64))
        if a.ndim != 2 or a.shape[0] != a.shape[1]:
            raise NotSPDError("SPD matrix must be square")
        if not np.all(np.isfinite(a)):
            raise NotSPDError("SPD matrix has non-finite entries")
        if np.max(np.abs(a - a.T), initial=0.0) > SYMMETRY_TOL * max(1.0, np.max(np.abs(a))):
            raise NotSPDError("matrix is not symmetric")
        a = 0.5 * (a + a.T)
        if np.linalg.eigvalsh(a)[0] <= NEGATIVE_TOL:
            raise NotSPDError("matrix is not positive definite")
        object.__setattr__(self, "entries", a)

    @property
    def d(self) -> int:
        return self.entries.shape[0]


def _mat(S) -> np.ndarray:
    return S.entries if isinstance(S, SpdMatrix) else SpdMatrix(S).entries


def _psd_eigh(a: np.ndarray):
    """Eigendecomposition with the clipping policy for tiny negative eigenvalues."""
    a = 0.5 * (a + a.T)
    vals, vecs = np.linalg.eigh(a)
    if vals[0] < -NEGATIVE_TOL:
        raise NotSPDError(f"eigenvalue {vals[0]:.3e} is negative")
    if vals[0] < CLIP_FLOOR:
        warnings.warn(f"clipping eigenvalue {vals[0]:.3e} to {CLIP_FLOOR}", RuntimeWarning)
        vals = np.maximum(vals, CLIP_FLOOR)
    return vals, vecs


def _sqrt(a: np.ndarray) -> np.ndarray:
    vals, vecs = _psd_eigh(a)
    root = (vecs * np.sqrt(vals)) @ vecs.T
    return 0.5 * (root + root.T)


def spd_sqrt(S) -> SpdMatrix:
    """Symmetric square root ``Q diag(sqrt(lam)) Q'``."""
    return SpdMatrix(_sqrt(_mat(S)))


def spd_inv_sqrt(S) -> np.ndarray:
    vals, vecs = _psd_eigh(_mat(S))
    return (vecs / np.sqrt(vals)) @ vecs.T


def gaussian_w2(S1, S2) -> float:
    """2-Wasserstein distance between ``N(0, S1)`` and ``N(0, S2)``.

    ``W2^2 = tr(S1 + S2 - 2 (S1^{1/2} S2 S1^{1/2})^{1/2})``; the distance (not
    its square) is returned. It is evaluated as ``|S1^{1/2} - S2^{1/2} U|_F``
    with ``U`` the orthogonal Procrustes rotation, which equals the trace form
    but avoids its cancellation when the matrices are close.
    """
    a, b = _mat(S1), _mat(S2)
    if a.shape != b.shape:
        raise ValueError("dimension mismatch")
    ra, rb = _sqrt(a), _sqrt(b)
    u, _, vt = np.linalg.svd(rb.T @ ra)
    return float(np.linalg.norm(ra - rb @ (u @ vt), "fro"))


@dataclass
class CoupledPair:
    x: np.ndarray
    y: np.ndarray
    z_source: np.ndarray


def coupled_gaussian_pair(S1, S2, seed: int, size: int | None = None) -> CoupledPair:
    """Draw ``z ~ N(0, I)`` and return ``(S1^{1/2} z, S2^{1/2} z, z)``.

    With ``size`` the arrays gain a leading axis of that many independent draws.
    """
    a, b = _mat(S1), _mat(S2)
    if a.shape != b.shape:
        raise ValueError("dimension mismatch")
    shape = (a.shape[0],) if size is None else (int(size), a.shape[0])
    z = generator(seed, "coupling").standard_normal(shape)
    return couple(a, b, z)


def couple(S1, S2, z) -> CoupledPair:
    """Coupled pair from a caller-supplied standard normal source ``z``."""
    z = np.asarray(z, dtype=np.float64)
    ra, rb = _sqrt(_mat(S1)), _sqrt(_mat(S2))
    return CoupledPair(x=z @ ra, y=z @ rb, z_source=z)


def sqrt_frobenius_gap(S1, S2) -> float:
    """``|S1^{1/2} - S2^{1/2}|_F``, the root mean square gap of the coupling."""
    return float(np.linalg.norm(_sqrt(_mat(S1)) - _sqrt(_mat(S2)), "fro"))


def min_eigenvalue(M) -> float:
    """Smallest eigenvalue of a (symmetrized) symmetric matrix."""
    a = np.atleast_2d(np.asarray(M, dtype=np.float64))
    if a.ndim != 2 or a.shape[0] != a.shape[1]:
        raise ValueError("matrix must be square")
    if not np.all(np.isfinite(a)):
        raise ValueError("matrix has non-finite entries")
    if a.shape[0] == 1:
        return float(a[0, 0])
    return float(np.linalg.eigvalsh(0.5 * (a + a.T))[0])


def _check_lambda(lambda_star: float, *mats, need_all: bool) -> None:
    if not lambda_star > 0:
        raise ValueError("lambda_star must be positive")
    mins = [min_eigenvalue(m) for m in mats]
    ok = all(lambda_star <= v * (1 + 1e-12) for v in mins) if need_all else \
        any(lambda_star <= v * (1 + 1e-12) for v in mins)
    if not ok:
        if need_all:
            raise ValueError(f"lambda_star={lambda_star} exceeds a smallest eigenvalue {min(mins):.6g}")
        warnings.warn(
            f"lambda_star={lambda_star} exceeds the smallest eigenvalue of both matrices",
            RuntimeWarning,
        )


def coupling_bound(S1, S2, lambda_star: float) -> float:
    """Upper bound ``|S1 - S2|_F^2 / lambda_star`` on ``E|x - y|^2`` for the shared-z coupling."""
    a, b = _mat(S1), _mat(S2)
    _check_lambda(lambda_star, a, b, need_all=False)
    return float(np.linalg.norm(a - b, "fro") ** 2 / lambda_star)


def tv_bound(S1, S2) -> float:
    """Total variation bound ``1.5 * min(1, sqrt(sum rho_i^2))``.

    ``rho_i`` are the eigenvalues of ``S1^{-1} S2 - I``, computed through the
    symmetric similarity ``S1^{-1/2} S2 S1^{-1/2} - I``.
    """
    a, b = _mat(S1), _mat(S2)
    if a.shape != b.shape:
        raise ValueError("dimension mismatch")
    w = spd_inv_sqrt(a)
    m = w @ b @ w - np.eye(a.shape[0])
    rho = np.linalg.eigvalsh(0.5 * (m + m.T))
    return 1.5 * min(1.0, math.sqrt(float(np.sum(rho**2))))


def vha_check(S1, S2, lambda_star: float) -> tuple:
    """Both sides of ``|S1^{1/2} - S2^{1/2}|_F <= lambda_star^{-1/2} |S1 - S2|_F``."""
    a, b = _mat(S1), _mat(S2)
    _check_lambda(lambda_star, a, b, need_all=True)
    lhs = sqrt_frobenius_gap(a, b)
    rhs = float(np.linalg.norm(a - b, "fro") / math.sqrt(lambda_star))
    return lhs, rhs


def empirical_w2_1d(a, b) -> float:
    """Exact W2 between two equal-size empirical measures on the line (sorted matching)."""
    a = np.sort(np.asarray(a, dtype=np.float64).ravel())
    b = np.sort(np.asarray(b, dtype=np.float64).ravel())
    if a.size != b.size:
        raise ValueError("samples must have equal size")
    if a.size < 2:
        raise ValueError("need at least two points per sample")
    return float(np.sqrt(np.mean((a - b) ** 2)))


def empirical_kolmogorov(a, b) -> float:
    """Two-sample Kolmogorov distance ``sup_x |F_a(x) - F_b(x)|``."""
    a = np.sort(np.asarray(a, dtype=np.float64).ravel())
    b = np.sort(np.asarray(b, dtype=np.float64).ravel())
    if a.size == 0 or b.size == 0:
        raise ValueError("samples must be non-empty")
    grid = np.concatenate([a, b])
    fa = np.searchsorted(a, grid, side="right") / a.size
    fb = np.searchsorted(b, grid, side="right") / b.size
    return float(np.max(np.abs(fa - fb)))


def random_spd(d: int, rng: np.random.Generator, floor: float = 0.1) -> np.ndarray:
    """Random SPD test matrix ``W W' / d + floor * I``."""
    w = rng.standard_normal((d, d))
    return w @ w.T / d + floor * np.eye(d)
