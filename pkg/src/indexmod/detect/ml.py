"""Exhaustive maximum-likelihood detection over block-indexed signal sets.

For a member with active blocks b_1..b_K carrying alphabet labels a_1..a_K,

    ||y - H x||^2 = ||y||^2 + sum_k lin[b_k, a_k] + sum_{k<l} G[b_k, b_l][a_k, a_l]

with u_{b,a} = H_b alphabet[a], lin[b, a] = ||u_{b,a}||^2 - 2 Re(y^H u_{b,a}) and
G[b, b'] = 2 Re(U_b^H U_b'). The metric of every member of a pattern is
therefore a sum of broadcast one- and two-block tables, which turns the
search into a few small matrix products instead of one dense product per
candidate. All functions accept a leading batch axis of independent frames.
"""

from __future__ import annotations

import numpy as np

from ..signalset import DEFAULT_ENUMERATION_CAP, BlockSignalSet

# Upper bound on metric-table entries materialised at once.
_CHUNK_ENTRIES = 1 << 22


def _block_images(H: np.ndarray, sigset: BlockSignalSet) -> np.ndarray:
    """u_{b,a} for every block and label: shape (B, N, m, A)."""
    B, m, _ = H.shape
    Hb = H.reshape(B, m, sigset.n_blocks, sigset.block_dim).transpose(0, 2, 1, 3)
    return Hb @ sigset.alphabet.T


def ml_search(Y, H, sigset: BlockSignalSet, cap: int = DEFAULT_ENUMERATION_CAP):
    """Batched ML search.

    Args:
        Y: received vectors, shape (B, m) or (m,).
        H: channel matrices, shape (B, m, n), or (m, n) shared by the batch.
        sigset: the signal set to search.
        cap: refuse sets larger than this.

    Returns:
        (flat index in bit-string order, squared residual norm), each of shape
        (B,) (or scalars for unbatched input). Ties go to the lowest index.
    """
    sigset.check_cap(cap)
    Y = np.asarray(Y)
    single = Y.ndim == 1
    Y = np.atleast_2d(Y)
    H = np.asarray(H)
    if H.ndim == 2:
        H = np.broadcast_to(H, (Y.shape[0],) + H.shape)
    if H.shape[-1] != sigset.length or H.shape[:2] != Y.shape:
        raise ValueError(f"shape mismatch: Y {Y.shape}, H {H.shape}, signal length {sigset.length}")

    A = sigset.alphabet_size
    K = sigset.active_blocks
    per_pattern = A ** K
    step = max(1, _CHUNK_ENTRIES // per_pattern)
    best_idx = np.empty(Y.shape[0], dtype=np.int64)
    best_val = np.empty(Y.shape[0])
    for start in range(0, Y.shape[0], step):
        sl = slice(start, start + step)
        best_idx[sl], best_val[sl] = _search_chunk(Y[sl], H[sl], sigset)
    if single:
        return int(best_idx[0]), float(best_val[0])
    return best_idx, best_val


def _search_chunk(Y, H, sigset):
    B = Y.shape[0]
    A = sigset.alphabet_size
    K = sigset.active_blocks
    U = _block_images(H, sigset)  # (B, N, m, A)
    lin = np.sum(U.real ** 2 + U.imag ** 2, axis=2) - 2.0 * np.einsum("bm,bnma->bna", Y.conj(), U).real
    base = np.sum(np.abs(Y) ** 2, axis=1)
    gram: dict[tuple[int, int], np.ndarray] = {}

    best_val = np.full(B, np.inf)
    best_idx = np.zeros(B, dtype=np.int64)
    for p, blocks in enumerate(sigset.codebook.active_slots):
        table = np.zeros((B,) + (A,) * K)
        for k, b in enumerate(blocks):
            shape = [B] + [1] * K
            shape[1 + k] = A
            table += lin[:, b].reshape(shape)
        for k in range(K):
            for l in range(k + 1, K):
                key = (int(blocks[k]), int(blocks[l]))
                if key not in gram:
                    gram[key] = 2.0 * (U[:, key[0]].conj().transpose(0, 2, 1) @ U[:, key[1]]).real
                shape = [B] + [1] * K
                shape[1 + k] = A
                shape[1 + l] = A
                table += gram[key].reshape(shape)
        flat = table.reshape(B, -1)
        idx = np.argmin(flat, axis=1)
        val = flat[np.arange(B), idx]
        better = val < best_val  # strict: earlier patterns win ties
        best_val[better] = val[better]
        best_idx[better] = p * A ** K + idx[better]
    return best_idx, best_val + base
