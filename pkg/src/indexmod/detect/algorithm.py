"""Scheme-level detectors: ML and the sparsity-exploiting TAP search."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from ..schemes import Frame, SchemeConfig, frame_from_indices
from ..signalset import DEFAULT_ENUMERATION_CAP
from .ml import ml_search
from .sparse import SparseEstimate, cosamp, omp_path, subspace_pursuit

SR_METHODS = ("omp", "cosamp", "sp")


@dataclass(frozen=True, eq=False)
class DetectionResult:
    frame: Frame
    bits: np.ndarray
    method: str
    sr_iterations: int = 0
    fallback: bool = False


def _result(cfg: SchemeConfig, pidx: int, labels, method: str, j: int = 0, fallback: bool = False):
    frame = frame_from_indices(cfg, pidx, labels)
    bits = cfg.signal_set.join_bits(pidx, np.asarray(labels))
    return DetectionResult(frame=frame, bits=bits, method=method, sr_iterations=j, fallback=fallback)


def ml_detect(y, H, cfg: SchemeConfig, cap: int = DEFAULT_ENUMERATION_CAP) -> DetectionResult:
    """argmin over the signal set of ||y - Hx||^2, ties to the lowest enumeration index."""
    flat, _ = ml_search(y, H, cfg.signal_set, cap=cap)
    pidx, labels = cfg.signal_set.unflatten(flat)
    return _result(cfg, int(pidx), labels, "ml")


def nearest_slot_labels(subvecs, cfg: SchemeConfig) -> np.ndarray:
    """Label of the nearest one-nonzero slot vector for each row of ``subvecs``.

    With one nonzero at position p holding symbol s,
    ||v - s e_p||^2 = ||v||^2 - |v_p|^2 + |v_p - s|^2, so each position only
    needs its nearest symbol and the best position minimises
    |v_p - s_p|^2 - |v_p|^2. Ties go to the lowest label.
    """
    V = np.atleast_2d(np.asarray(subvecs))
    n_pos = (1 << cfg.antenna_bits) * cfg.M  # indexed units only
    Vp = V[:, :n_pos]
    d2 = np.abs(Vp[..., None] - cfg.alphabet.points) ** 2  # (R, n_pos, |M|)
    sym = np.argmin(d2, axis=-1)
    cost = np.take_along_axis(d2, sym[..., None], axis=-1)[..., 0] - np.abs(Vp) ** 2
    pos = np.argmin(cost, axis=1)
    s = sym[np.arange(V.shape[0]), pos]
    j, k = np.divmod(pos, cfg.M)
    return (j << (cfg.m_rf + cfg.symbol_bits)) | (k << cfg.symbol_bits) | s


def nearest_slot_vector(subvec, cfg: SchemeConfig) -> np.ndarray:
    """Nearest member of the per-slot signal set to a D-length subvector."""
    subvec = np.asarray(subvec)
    if subvec.shape != (cfg.D,):
        raise ValueError(f"subvector must have length D={cfg.D}, got shape {subvec.shape}")
    return cfg.signal_set.alphabet[int(nearest_slot_labels(subvec, cfg)[0])].copy()


def _sr_estimates(y, H, sr: str, K: int, k_stop: int, max_iter: int, tol: float):
    """Yield SR(y, H, K + j) for j = 0, 1, ... up to sparsity k_stop."""
    if sr == "omp":
        for est in omp_path(y, H, k_stop):
            if est.support.size >= K:
                yield est
    elif sr == "cosamp":
        for k in range(K, k_stop + 1):
            yield cosamp(y, H, k, max_iter=max_iter, tol=tol)
    elif sr == "sp":
        for k in range(K, k_stop + 1):
            yield subspace_pursuit(y, H, k, max_iter=max_iter)
    else:
        raise ValueError(f"unknown sparse-recovery method {sr!r}; expected one of {SR_METHODS}")


def algorithm1_detect(y, H, cfg: SchemeConfig, sr: str = "sp", max_iter: int = 50, tol: float = 1e-6,
                      max_sparsity: int | None = None) -> DetectionResult:
    """Sparsity-exploiting detection with TAP validation.

    Runs SR with sparsity K, K+1, ... until the slots touched by the recovered
    support form a valid TAP, then maps each active slot to its nearest
    per-slot signal vector. If no valid TAP turns up the valid TAP with the
    largest recovered slot energy in the last estimate is used instead.

    The sparsity stops at ``max_sparsity`` (default: min(#rows, #columns)),
    beyond which least squares is underdetermined.
    """
    H = np.asarray(H)
    m, n = H.shape
    K, N, D = cfg.K, cfg.N, cfg.D
    if max_sparsity is None:
        max_sparsity = min(m, n)
    k_stop = max(K, min(max_sparsity, n - 1))
    codebook = cfg.tap_codebook

    est: SparseEstimate | None = None
    for j, est in enumerate(_sr_estimates(y, H, sr, K, k_stop, max_iter, tol)):
        tap = np.zeros(N, dtype=bool)
        tap[est.support // D] = True
        if tap.sum() == K and tap in codebook:
            slots = np.flatnonzero(tap)
            sub = est.values.reshape(N, D)[slots]
            return _result(cfg, codebook.index_of(tap), nearest_slot_labels(sub, cfg), f"alg1-{sr}", j)

    energy = np.sum(np.abs(est.values.reshape(N, D)) ** 2, axis=1)
    pidx = int(np.argmax(codebook.patterns @ energy))
    slots = codebook.active_slots[pidx]
    sub = est.values.reshape(N, D)[slots]
    return _result(cfg, pidx, nearest_slot_labels(sub, cfg), f"alg1-{sr}", j, fallback=True)
