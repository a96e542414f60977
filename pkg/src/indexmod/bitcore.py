"""Bit-level plumbing: combinadics, activation-pattern codebooks, QAM/PSK alphabets."""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Iterable, Sequence

import numpy as np

from .errors import ConfigurationError

__all__ = [
    "ActivationPattern",
    "PatternCodebook",
    "ComplexAlphabet",
    "combinadic_unrank",
    "combinadic_rank",
    "build_pattern_codebook",
    "make_qam",
    "make_psk",
    "bits_to_int",
    "int_to_bits",
    "floor_log2",
]


def floor_log2(n: int) -> int:
    if n < 1:
        raise ValueError(f"floor_log2 needs n >= 1, got {n}")
    return int(n).bit_length() - 1


def bits_to_int(bits: Iterable[int]) -> int:
    """MSB-first bit sequence to integer."""
    value = 0
    for b in bits:
        value = (value << 1) | int(b)
    return value


def int_to_bits(value: int, width: int) -> np.ndarray:
    """Integer to MSB-first uint8 bit vector of the given width."""
    if width == 0:
        return np.zeros(0, dtype=np.uint8)
    shifts = np.arange(width - 1, -1, -1)
    return ((int(value) >> shifts) & 1).astype(np.uint8)


# ---------------------------------------------------------------------------
# Activation patterns and combinadics
# ---------------------------------------------------------------------------

ActivationPattern = np.ndarray
"""Boolean vector of length N (TAP) or n_L (LAP); weight = number of True entries."""


def _as_pattern(pattern: Sequence[int] | np.ndarray) -> np.ndarray:
    arr = np.asarray(pattern)
    if arr.ndim != 1 or arr.size == 0:
        raise ValueError(f"pattern must be a nonempty 1-D vector, got shape {arr.shape}")
    if not np.all((arr == 0) | (arr == 1)):
        raise ValueError("pattern entries must be 0/1")
    return arr.astype(bool)


def combinadic_unrank(rank: int, N: int, K: int) -> np.ndarray:
    """Return the rank-th K-subset of {0..N-1} (lexicographic) as a boolean vector."""
    if not 1 <= K <= N:
        raise ValueError(f"need 1 <= K <= N, got N={N}, K={K}")
    total = math.comb(N, K)
    if not 0 <= rank < total:
        raise ValueError(f"rank {rank} outside [0, {total})")
    out = np.zeros(N, dtype=bool)
    r = int(rank)
    start = 0
    for remaining in range(K, 0, -1):
        # Walk forward until the block of subsets starting at `pos` contains r.
        pos = start
        while True:
            block = math.comb(N - pos - 1, remaining - 1)
            if r < block:
                break
            r -= block
            pos += 1
        out[pos] = True
        start = pos + 1
    return out


def combinadic_rank(pattern: Sequence[int] | np.ndarray) -> int:
    """Lexicographic rank of the active-index set of ``pattern``; inverse of unrank."""
    arr = _as_pattern(pattern)
    N = arr.size
    active = np.flatnonzero(arr)
    K = active.size
    if K == 0:
        raise ValueError("pattern must have weight >= 1")
    rank = 0
    prev = -1
    for i, pos in enumerate(active):
        remaining = K - i
        for skipped in range(prev + 1, pos):
            rank += math.comb(N - skipped - 1, remaining - 1)
        prev = pos
    return rank


@dataclass(frozen=True, eq=False)
class PatternCodebook:
    """Ordered set of valid weight-K activation patterns.

    ``patterns[i]`` is the pattern selected by index bits encoding ``i``.
    """

    N: int
    K: int
    patterns: np.ndarray  # (size, N) bool
    index_bits: int
    _lookup: dict = field(repr=False, compare=False, default_factory=dict)

    def __post_init__(self):
        lookup = {p.tobytes(): i for i, p in enumerate(self.patterns)}
        object.__setattr__(self, "_lookup", lookup)
        self.patterns.setflags(write=False)

    @property
    def size(self) -> int:
        return self.patterns.shape[0]

    def index_of(self, pattern: Sequence[int] | np.ndarray) -> int:
        """Codebook index of ``pattern``; raises KeyError if it is not a member."""
        key = np.asarray(pattern, dtype=bool).tobytes()
        return self._lookup[key]

    def __contains__(self, pattern) -> bool:
        arr = np.asarray(pattern, dtype=bool)
        return arr.shape == (self.N,) and arr.tobytes() in self._lookup

    def __len__(self) -> int:
        return self.size

    def __eq__(self, other) -> bool:
        if not isinstance(other, PatternCodebook):
            return NotImplemented
        return np.array_equal(self.patterns, other.patterns)

    def __hash__(self) -> int:
        return hash(self.patterns.tobytes())

    @property
    def active_slots(self) -> np.ndarray:
        """(size, K) int array of active indices per pattern, increasing."""
        return np.array([np.flatnonzero(p) for p in self.patterns], dtype=np.intp).reshape(self.size, self.K)


def build_pattern_codebook(
    N: int, K: int, override: Sequence[Sequence[int]] | None = None
) -> PatternCodebook:
    """Build the set of 2**floor(log2 C(N, K)) valid activation patterns.

    Args:
        N: pattern length.
        K: pattern weight.
        override: explicit pattern list replacing the lexicographic default
            verbatim (order defines the bit labelling).
    """
    if not 1 <= K <= N:
        raise ConfigurationError(f"need 1 <= K <= N, got N={N}, K={K}")
    index_bits = floor_log2(math.comb(N, K))
    size = 1 << index_bits
    if override is None:
        patterns = np.array([combinadic_unrank(r, N, K) for r in range(size)], dtype=bool)
    else:
        patterns = np.array([np.asarray(p, dtype=int) for p in override])
        if patterns.ndim != 2 or patterns.shape != (size, N):
            raise ConfigurationError(
                f"override must hold exactly {size} patterns of length {N}, got shape {patterns.shape}"
            )
        if not np.all((patterns == 0) | (patterns == 1)):
            raise ConfigurationError("override patterns must be 0/1")
        patterns = patterns.astype(bool)
        if np.any(patterns.sum(axis=1) != K):
            raise ConfigurationError(f"every override pattern must have weight {K}")
        if len({p.tobytes() for p in patterns}) != size:
            raise ConfigurationError("override patterns must be distinct")
    return PatternCodebook(N=N, K=K, patterns=patterns, index_bits=index_bits)


# ---------------------------------------------------------------------------
# Complex alphabets
# ---------------------------------------------------------------------------

@dataclass(frozen=True, eq=False)
class ComplexAlphabet:
    """Unit-energy constellation; ``points[label]`` is the point for bit label ``label``."""

    name: str
    points: np.ndarray

    def __post_init__(self):
        self.points.setflags(write=False)

    @property
    def order(self) -> int:
        return self.points.size

    @property
    def bits_per_symbol(self) -> int:
        return floor_log2(self.order)

    def modulate(self, labels) -> np.ndarray:
        return self.points[np.asarray(labels)]

    def label_of(self, value: complex, atol: float = 1e-9) -> int:
        """Exact-membership lookup; raises ValueError for off-alphabet values."""
        d = np.abs(self.points - value)
        i = int(np.argmin(d))
        if d[i] > atol:
            raise ValueError(f"value {value} is not an alphabet point of {self.name}")
        return i

    def nearest(self, values) -> np.ndarray:
        """Label of the nearest point for each value (ties to lowest label)."""
        v = np.asarray(values)
        return np.argmin(np.abs(v[..., None] - self.points) ** 2, axis=-1)


def _gray(n: int) -> int:
    return n ^ (n >> 1)


def _pam_levels(bits: int) -> np.ndarray:
    """Gray-labelled PAM: levels[label] for label in [0, 2**bits)."""
    m = 1 << bits
    levels = np.empty(m)
    for i in range(m):
        levels[_gray(i)] = 2 * i - (m - 1)
    return levels


def _normalize(points: np.ndarray) -> np.ndarray:
    return points / np.sqrt(np.mean(np.abs(points) ** 2))


def _cross32() -> np.ndarray:
    # Start from a Gray-labelled 8x4 rectangle (3 I bits, 2 Q bits) and fold the
    # outer columns x = +-7 onto the rows y = +-5 above/below x in {+-1, +-3}.
    xi = _pam_levels(3)
    yq = _pam_levels(2)
    pts = np.empty(32, dtype=complex)
    for label in range(32):
        x = xi[label >> 2]
        y = yq[label & 3]
        if abs(x) == 7:
            x, y = np.sign(x) * (4 - abs(y)), np.sign(y) * 5
        pts[label] = x + 1j * y
    return pts


def make_qam(order: int) -> ComplexAlphabet:
    """Gray-mapped unit-energy QAM; order 2 is BPSK, 8 is 4x2 rectangular, 32 is cross."""
    if order == 2:
        return ComplexAlphabet("bpsk", np.array([1.0 + 0j, -1.0 + 0j]))
    if order not in (4, 8, 16, 32, 64):
        raise ConfigurationError(f"unsupported QAM order {order}; use 2, 4, 8, 16, 32 or 64")
    k = floor_log2(order)
    if order == 32:
        pts = _cross32()
    else:
        ki = (k + 1) // 2
        kq = k - ki
        xi = _pam_levels(ki)
        yq = _pam_levels(kq)
        labels = np.arange(order)
        pts = xi[labels >> kq] + 1j * yq[labels & ((1 << kq) - 1)]
        if order == 4:
            # QPSK: first bit drives the real sign, second the imaginary sign.
            pts = -pts.real - 1j * pts.imag
    return ComplexAlphabet(f"{order}qam", _normalize(pts.astype(complex)))


def make_psk(order: int) -> ComplexAlphabet:
    """Gray-mapped unit-modulus PSK."""
    if order < 2 or order & (order - 1):
        raise ConfigurationError(f"PSK order must be a power of two >= 2, got {order}")
    pts = np.empty(order, dtype=complex)
    for i in range(order):
        pts[_gray(i)] = np.exp(2j * np.pi * i / order)
    return ComplexAlphabet(f"{order}psk", pts)
