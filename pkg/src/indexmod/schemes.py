"""TI-SM, TI-MBM, SM-MBM and TI-SM-MBM: configuration, rates, encoder and decoder.

All four schemes are handled as TI-SM-MBM with some dimensions collapsed.
A frame has N slots of D = n_t * M entries (M = 2**m_rf mirror activation
patterns per unit). An active slot carries one nonzero, a symbol from the
QAM/PSK alphabet placed at offset ``j*M + k`` where ``j`` is the active unit
and ``k`` the mirror activation pattern.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from fractions import Fraction
from typing import Iterator, Sequence

import numpy as np

from .bitcore import ComplexAlphabet, PatternCodebook, build_pattern_codebook, floor_log2, make_qam
from .errors import ConfigurationError, DecodeError
from .signalset import DEFAULT_ENUMERATION_CAP, BlockSignalSet

KINDS = ("ti-sm", "ti-mbm", "sm-mbm", "ti-sm-mbm")
ENERGY_NORMS = ("per_slot", "per_frame")


@dataclass(frozen=True, eq=False)
class SchemeConfig:
    """All parameters of one index-modulation scheme instance."""

    kind: str
    N: int
    K: int
    L: int = 1
    n_t: int = 1
    m_rf: int = 0
    mod_order: int = 2
    n_r: int = 1
    tap_codebook: PatternCodebook | None = None
    energy_norm: str = "per_slot"
    alphabet: ComplexAlphabet = field(init=False, repr=False)
    signal_set: BlockSignalSet = field(init=False, repr=False)

    def __post_init__(self):
        kind = self.kind.lower()
        if kind not in KINDS:
            raise ConfigurationError(f"unknown scheme kind {self.kind!r}; expected one of {KINDS}")
        object.__setattr__(self, "kind", kind)
        if not 1 <= self.K <= self.N:
            raise ConfigurationError(f"need 1 <= K <= N, got N={self.N}, K={self.K}")
        if self.L < 1 or self.n_t < 1 or self.m_rf < 0 or self.n_r < 1:
            raise ConfigurationError("need L >= 1, n_t >= 1, m_rf >= 0, n_r >= 1")
        if kind == "ti-sm" and self.m_rf != 0:
            raise ConfigurationError("TI-SM has no RF mirrors (m_rf must be 0)")
        if kind == "ti-mbm" and self.n_t != 1:
            raise ConfigurationError("TI-MBM uses a single transmit unit (n_t must be 1)")
        if kind == "sm-mbm" and self.K != self.N:
            raise ConfigurationError("SM-MBM activates every slot (K must equal N)")
        if self.energy_norm not in ENERGY_NORMS:
            raise ConfigurationError(f"energy_norm must be one of {ENERGY_NORMS}")
        cb = self.tap_codebook
        if cb is None:
            cb = build_pattern_codebook(self.N, self.K)
            object.__setattr__(self, "tap_codebook", cb)
        elif (cb.N, cb.K) != (self.N, self.K):
            raise ConfigurationError(f"TAP codebook is for N={cb.N}, K={cb.K}, not N={self.N}, K={self.K}")
        object.__setattr__(self, "alphabet", make_qam(self.mod_order))
        object.__setattr__(self, "signal_set", BlockSignalSet(cb, self._slot_alphabet()))

    @classmethod
    def from_params(cls, kind: str, *, taps: Sequence[Sequence[int]] | None = None, **params) -> "SchemeConfig":
        """Build a config, optionally with an explicit TAP list overriding the default codebook."""
        cb = None
        if taps is not None:
            cb = build_pattern_codebook(params["N"], params["K"], override=taps)
        return cls(kind=kind, tap_codebook=cb, **params)

    def with_(self, **changes) -> "SchemeConfig":
        params = {k: getattr(self, k) for k in
                  ("kind", "N", "K", "L", "n_t", "m_rf", "mod_order", "n_r", "tap_codebook", "energy_norm")}
        params.update(changes)
        if "N" in changes or "K" in changes:
            if "tap_codebook" not in changes:
                params["tap_codebook"] = None
        return SchemeConfig(**params)

    # -- derived sizes ----------------------------------------------------------

    @property
    def M(self) -> int:
        return 1 << self.m_rf

    @property
    def D(self) -> int:
        return self.n_t * self.M

    @property
    def antenna_bits(self) -> int:
        return floor_log2(self.n_t)

    @property
    def symbol_bits(self) -> int:
        return self.alphabet.bits_per_symbol

    @property
    def slot_bits(self) -> int:
        return self.antenna_bits + self.m_rf + self.symbol_bits

    @property
    def length(self) -> int:
        return self.N * self.D

    @property
    def label(self) -> str:
        norm = ",per_frame" if self.energy_norm == "per_frame" else ""
        return (f"{self.kind}(N={self.N},K={self.K},L={self.L},nt={self.n_t},"
                f"mrf={self.m_rf},{self.mod_order}qam,nr={self.n_r}{norm})")

    # -- per-slot alphabet ------------------------------------------------------

    def slot_label_parts(self, labels):
        """Split slot labels into (unit j, mirror pattern k, symbol label s)."""
        labels = np.asarray(labels, dtype=np.int64)
        sb, mb = self.symbol_bits, self.m_rf
        s = labels & ((1 << sb) - 1)
        k = (labels >> sb) & ((1 << mb) - 1)
        j = labels >> (sb + mb)
        return j, k, s

    def slot_positions(self, labels) -> np.ndarray:
        j, k, _ = self.slot_label_parts(labels)
        return j * self.M + k

    def slot_values(self, labels) -> np.ndarray:
        return self.alphabet.points[self.slot_label_parts(labels)[2]]

    def _slot_alphabet(self) -> np.ndarray:
        A = 1 << (self.antenna_bits + self.m_rf + self.alphabet.bits_per_symbol)
        labels = np.arange(A)
        vecs = np.zeros((A, self.n_t * (1 << self.m_rf)), dtype=complex)
        vecs[labels, self.slot_positions(labels)] = self.slot_values(labels)
        return vecs


@dataclass(frozen=True, eq=False)
class Frame:
    """Sparse transmit vector: K nonzeros at flat indices ``support``."""

    length: int
    support: np.ndarray  # (K,) int, increasing
    values: np.ndarray  # (K,) complex
    tap: np.ndarray  # (N,) bool

    def to_dense(self) -> np.ndarray:
        x = np.zeros(self.length, dtype=complex)
        x[self.support] = self.values
        return x

    def __eq__(self, other) -> bool:
        if not isinstance(other, Frame):
            return NotImplemented
        return (self.length == other.length and np.array_equal(self.support, other.support)
                and np.array_equal(self.values, other.values) and np.array_equal(self.tap, other.tap))

    __hash__ = None


def frame_bit_budget(cfg: SchemeConfig) -> int:
    """Bits per frame: floor(log2 C(N,K)) + K(floor(log2 n_t) + m_rf + log2|M|)."""
    return cfg.signal_set.frame_bits


def scheme_rate(cfg: SchemeConfig) -> Fraction:
    """Exact rate in bits per channel use; the CP costs L-1 slots per frame."""
    return Fraction(frame_bit_budget(cfg), cfg.N + cfg.L - 1)


def sparsity_factor(cfg: SchemeConfig) -> Fraction:
    return Fraction(cfg.K, cfg.N * cfg.n_t * cfg.M)


def frame_from_indices(cfg: SchemeConfig, pattern_idx: int, labels) -> Frame:
    labels = np.asarray(labels, dtype=np.int64)
    tap = cfg.tap_codebook.patterns[pattern_idx]
    slots = np.flatnonzero(tap)
    support = slots * cfg.D + cfg.slot_positions(labels)
    return Frame(length=cfg.length, support=support, values=cfg.slot_values(labels), tap=tap.copy())


def encode_frame(cfg: SchemeConfig, bits) -> Frame:
    """Map exactly ``frame_bit_budget(cfg)`` bits to a frame.

    Bits are consumed as: time-index bits (TAP codebook index), then for each
    active slot in increasing order the unit-index, mirror-index and symbol bits.
    """
    bits = np.asarray(bits)
    if bits.ndim != 1 or bits.size != frame_bit_budget(cfg):
        raise ValueError(f"{cfg.kind} frame takes {frame_bit_budget(cfg)} bits, got {bits.size}")
    pidx, labels = cfg.signal_set.split_bits(bits)
    return frame_from_indices(cfg, int(pidx), labels)


def frame_indices(cfg: SchemeConfig, frame: Frame) -> tuple[int, np.ndarray]:
    """(TAP codebook index, slot labels) of a valid frame; DecodeError otherwise."""
    support = np.asarray(frame.support, dtype=np.int64)
    values = np.asarray(frame.values)
    nz = np.abs(values) > 0
    support, values = support[nz], values[nz]
    order = np.argsort(support, kind="stable")
    support, values = support[order], values[order]
    slots, offsets = np.divmod(support, cfg.D)
    tap = np.zeros(cfg.N, dtype=bool)
    tap[slots] = True
    if support.size != cfg.K or np.unique(slots).size != cfg.K or tap not in cfg.tap_codebook:
        raise DecodeError(f"frame support {support.tolist()} does not form a valid TAP")
    j, k = np.divmod(offsets, cfg.M)
    if np.any(j >= (1 << cfg.antenna_bits)):
        raise DecodeError("frame activates a transmit unit outside the indexed set")
    labels = np.empty(cfg.K, dtype=np.int64)
    sb, mb = cfg.symbol_bits, cfg.m_rf
    for i, v in enumerate(values):
        try:
            s = cfg.alphabet.label_of(v)
        except ValueError as exc:
            raise DecodeError(str(exc)) from None
        labels[i] = (int(j[i]) << (sb + mb)) | (int(k[i]) << sb) | s
    return cfg.tap_codebook.index_of(tap), labels


def decode_frame(cfg: SchemeConfig, frame: Frame) -> np.ndarray:
    """Exact inverse of :func:`encode_frame`."""
    return cfg.signal_set.join_bits(*frame_indices(cfg, frame))


def enumerate_signal_set(cfg: SchemeConfig, cap: int = DEFAULT_ENUMERATION_CAP) -> Iterator[Frame]:
    """Every frame of the scheme exactly once, in bit-string order."""
    for pidx, labels in cfg.signal_set.enumerate(cap):
        yield frame_from_indices(cfg, pidx, labels)
