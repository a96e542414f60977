"""Block-indexed signal sets.

Every scheme in this package transmits a vector made of ``n_blocks`` blocks of
``block_dim`` entries. An activation pattern from a codebook picks which K
blocks are active; each active block carries one vector from a per-block
alphabet and inactive blocks are zero. TI-SM/TI-MBM/SM-MBM/TI-SM-MBM (blocks
are time slots), SI-LM (blocks are LM transmit units), TI-LM and the
spatial-multiplexing baselines all fit this mould, which lets one ML engine
and one bit mapper serve them all.

Bit layout of a frame, MSB first: pattern-index bits, then one label of
``bits_per_block`` bits per active block in increasing block order.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Iterator

import numpy as np

from .bitcore import PatternCodebook, floor_log2
from .errors import ConfigurationError, DecodeError, EnumerationLimitError

DEFAULT_ENUMERATION_CAP = 1 << 22


@dataclass(frozen=True, eq=False)
class BlockSignalSet:
    """Pattern codebook plus a per-block alphabet of ``block_dim``-vectors.

    ``alphabet[label]`` is the block vector sent for a given label.
    """

    codebook: PatternCodebook
    alphabet: np.ndarray  # (A, D) complex

    def __post_init__(self):
        A = self.alphabet.shape[0]
        if A < 1 or A & (A - 1):
            raise ConfigurationError(f"block alphabet size must be a power of two, got {A}")
        self.alphabet.setflags(write=False)

    @property
    def n_blocks(self) -> int:
        return self.codebook.N

    @property
    def active_blocks(self) -> int:
        return self.codebook.K

    @property
    def block_dim(self) -> int:
        return self.alphabet.shape[1]

    @property
    def length(self) -> int:
        return self.n_blocks * self.block_dim

    @property
    def alphabet_size(self) -> int:
        return self.alphabet.shape[0]

    @property
    def bits_per_block(self) -> int:
        return floor_log2(self.alphabet_size)

    @property
    def frame_bits(self) -> int:
        return self.codebook.index_bits + self.active_blocks * self.bits_per_block

    @property
    def size(self) -> int:
        return self.codebook.size * self.alphabet_size ** self.active_blocks

    # -- bits <-> (pattern index, labels) -------------------------------------

    def split_bits(self, bits: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
        """(..., frame_bits) bits -> pattern indices (...,) and labels (..., K)."""
        bits = np.asarray(bits)
        if bits.shape[-1] != self.frame_bits:
            raise ValueError(f"expected {self.frame_bits} bits, got {bits.shape[-1]}")
        ib = self.codebook.index_bits
        bpb = self.bits_per_block
        weights_i = 1 << np.arange(ib - 1, -1, -1, dtype=np.int64)
        pattern_idx = bits[..., :ib].astype(np.int64) @ weights_i if ib else np.zeros(bits.shape[:-1], np.int64)
        sym = bits[..., ib:].reshape(bits.shape[:-1] + (self.active_blocks, bpb)).astype(np.int64)
        weights_s = 1 << np.arange(bpb - 1, -1, -1, dtype=np.int64)
        labels = sym @ weights_s if bpb else np.zeros(sym.shape[:-1], np.int64)
        return pattern_idx, labels

    def join_bits(self, pattern_idx, labels) -> np.ndarray:
        """Inverse of :meth:`split_bits`."""
        pattern_idx = np.asarray(pattern_idx, dtype=np.int64)
        labels = np.asarray(labels, dtype=np.int64)
        ib = self.codebook.index_bits
        bpb = self.bits_per_block
        head = (pattern_idx[..., None] >> np.arange(ib - 1, -1, -1)) & 1
        body = (labels[..., None] >> np.arange(bpb - 1, -1, -1)) & 1
        body = body.reshape(labels.shape[:-1] + (self.active_blocks * bpb,))
        return np.concatenate([head, body], axis=-1).astype(np.uint8)

    def flat_index(self, pattern_idx, labels) -> np.ndarray:
        """Position of a member in bit-string (enumeration) order."""
        A = self.alphabet_size
        idx = np.asarray(pattern_idx, dtype=np.int64)
        for k in range(self.active_blocks):
            idx = idx * A + np.asarray(labels, dtype=np.int64)[..., k]
        return idx

    def unflatten(self, flat) -> tuple[np.ndarray, np.ndarray]:
        A = self.alphabet_size
        flat = np.asarray(flat, dtype=np.int64)
        labels = np.empty(flat.shape + (self.active_blocks,), dtype=np.int64)
        rest = flat.copy()
        for k in range(self.active_blocks - 1, -1, -1):
            labels[..., k] = rest % A
            rest //= A
        return rest, labels

    # -- vectors ---------------------------------------------------------------

    def vectors(self, pattern_idx, labels) -> np.ndarray:
        """Dense transmit vectors, shape (..., length)."""
        pattern_idx = np.asarray(pattern_idx)
        labels = np.asarray(labels)
        out = np.zeros(pattern_idx.shape + (self.n_blocks, self.block_dim), dtype=complex)
        slots = self.codebook.active_slots[pattern_idx]  # (..., K)
        np.put_along_axis(out, slots[..., None], self.alphabet[labels], axis=-2)
        return out.reshape(pattern_idx.shape + (self.length,))

    def encode(self, bits) -> np.ndarray:
        return self.vectors(*self.split_bits(bits))

    def identify(self, vector, atol: float = 1e-9) -> tuple[int, np.ndarray]:
        """Recover (pattern index, labels) of an exact member; DecodeError otherwise."""
        v = np.asarray(vector).reshape(self.n_blocks, self.block_dim)
        energy = np.sum(np.abs(v) ** 2, axis=1)
        active = energy > atol
        if active.sum() != self.active_blocks or active not in self.codebook:
            raise DecodeError(f"activation pattern {active.astype(int).tolist()} is not a valid pattern")
        pidx = self.codebook.index_of(active)
        labels = np.empty(self.active_blocks, dtype=np.int64)
        for k, b in enumerate(np.flatnonzero(active)):
            d = np.sum(np.abs(self.alphabet - v[b]) ** 2, axis=1)
            lab = int(np.argmin(d))
            if d[lab] > atol:
                raise DecodeError(f"block {b} does not hold an alphabet vector")
            labels[k] = lab
        return pidx, labels

    def decode(self, vector) -> np.ndarray:
        return self.join_bits(*self.identify(vector))

    def enumerate(self, cap: int = DEFAULT_ENUMERATION_CAP) -> Iterator[tuple[int, np.ndarray]]:
        """Yield (pattern index, labels) for every member in bit-string order."""
        self.check_cap(cap)
        A = self.alphabet_size
        K = self.active_blocks
        for flat in range(self.size):
            rest = flat
            labels = np.empty(K, dtype=np.int64)
            for k in range(K - 1, -1, -1):
                labels[k] = rest % A
                rest //= A
            yield rest, labels

    def check_cap(self, cap: int) -> None:
        if self.size > cap:
            raise EnumerationLimitError(self.size, cap)
