"""Complex-valued greedy sparse recovery: OMP, CoSaMP and subspace pursuit.

All three solve ``y ~ A x`` for a k-sparse ``x``; correlations use the
conjugate transpose and magnitudes the complex modulus. Least-squares fits
are minimum-norm, so rank-deficient supports never fail.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Iterator

import numpy as np

LSTSQ_RCOND = 1e-10


@dataclass(frozen=True, eq=False)
class SparseEstimate:
    values: np.ndarray  # (n,) complex, nonzero only on support
    support: np.ndarray  # (k,) int, increasing
    residual_norm: float
    iterations: int = 1


def _check(y, A, k):
    A = np.asarray(A)
    y = np.asarray(y)
    if A.ndim != 2 or y.shape != (A.shape[0],):
        raise ValueError(f"shape mismatch: y {y.shape}, A {A.shape}")
    if not 1 <= k <= A.shape[1]:
        raise ValueError(f"sparsity k={k} must lie in [1, {A.shape[1]}]")
    return y, A


def _proxy(A: np.ndarray, r: np.ndarray) -> np.ndarray:
    # |A^H r| without materialising A^H
    return np.abs(r.conj() @ A)


def _top(mag: np.ndarray, count: int) -> np.ndarray:
    """Indices of the ``count`` largest entries; ties go to the lowest index."""
    return np.argsort(-mag, kind="stable")[:count]


def least_squares(A: np.ndarray, y: np.ndarray, support: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    """Minimum-norm LS coefficients on ``support`` and the resulting residual."""
    As = A[:, support]
    coef = np.linalg.lstsq(As, y, rcond=LSTSQ_RCOND)[0]
    return coef, y - As @ coef


def _estimate(n: int, support, coef, residual, iterations) -> SparseEstimate:
    order = np.argsort(support)
    support = np.asarray(support)[order]
    values = np.zeros(n, dtype=complex)
    values[support] = np.asarray(coef)[order]
    return SparseEstimate(values=values, support=support,
                          residual_norm=float(np.linalg.norm(residual)), iterations=iterations)


def omp_path(y, A, k_max: int) -> Iterator[SparseEstimate]:
    """OMP iterates for sparsity 1, 2, ..., k_max.

    OMP supports are nested, so the sparsity-k estimate is simply the k-th
    iterate; callers that need several sparsity levels should walk this path.
    """
    y, A = _check(y, A, k_max)
    n = A.shape[1]
    r = y.astype(complex)
    support: list[int] = []
    selected = np.zeros(n, dtype=bool)
    for it in range(1, k_max + 1):
        mag = _proxy(A, r)
        mag[selected] = -1.0
        idx = int(np.argmax(mag))
        support.append(idx)
        selected[idx] = True
        coef, r = least_squares(A, y, np.array(support))
        yield _estimate(n, support, coef, r, it)


def omp(y, A, k: int) -> SparseEstimate:
    """Orthogonal matching pursuit with k greedy selections."""
    est = None
    for est in omp_path(y, A, k):
        pass
    return est


def cosamp(y, A, k: int, max_iter: int = 50, tol: float = 1e-6) -> SparseEstimate:
    """CoSaMP (Needell & Tropp), stopping on relative residual change below ``tol``.

    The lowest-residual support seen over the iterations is kept (CoSaMP is
    not monotone in noise) and the returned coefficients are an LS refit on it.
    """
    y, A = _check(y, A, k)
    if max_iter < 1:
        raise ValueError("max_iter must be >= 1")
    n = A.shape[1]
    r = y.astype(complex)
    support = np.zeros(0, dtype=np.intp)
    prev = float(np.linalg.norm(y))
    best, best_norm = support, np.inf
    it = 0
    for it in range(1, max_iter + 1):
        omega = _top(_proxy(A, r), min(2 * k, n))
        merged = np.union1d(omega, support)
        b, _ = least_squares(A, y, merged)
        keep = _top(np.abs(b), k)
        support = merged[keep]
        r = y - A[:, support] @ b[keep]
        norm = float(np.linalg.norm(r))
        if norm < best_norm:
            best, best_norm = support, norm
        if norm == 0.0 or not np.isfinite(tol) or abs(prev - norm) < tol * prev:
            break
        prev = norm
    coef, r = least_squares(A, y, best)
    support = best
    return _estimate(n, support, coef, r, it)


def subspace_pursuit(y, A, k: int, max_iter: int = 50) -> SparseEstimate:
    """Subspace pursuit (Dai & Milenkovic); stops once the residual stops shrinking."""
    y, A = _check(y, A, k)
    if max_iter < 1:
        raise ValueError("max_iter must be >= 1")
    n = A.shape[1]
    support = _top(_proxy(A, y), k)
    coef, r = least_squares(A, y, support)
    norm = float(np.linalg.norm(r))
    it = 0
    for it in range(1, max_iter + 1):
        merged = np.union1d(support, _top(_proxy(A, r), k))
        b, _ = least_squares(A, y, merged)
        cand = merged[_top(np.abs(b), k)]
        c_coef, c_r = least_squares(A, y, cand)
        c_norm = float(np.linalg.norm(c_r))
        if c_norm >= norm:
            break
        support, coef, r, norm = cand, c_coef, c_r, c_norm
    return _estimate(n, support, coef, r, it)


SOLVERS = {"omp": omp, "cosamp": cosamp, "sp": subspace_pursuit}
