"""Load modulation on the complex hypersphere, with spatial and time indexing.

An LM alphabet is a set of n_M vectors in C^{n_t} with constant squared norm
P, designed by clustering uniform samples of the sphere with spherical
k-means. The indexed schemes reuse the block signal-set machinery: SI-LM
blocks are LM transmit units, TI-LM blocks are time slots.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from fractions import Fraction
from pathlib import Path
from typing import Iterator, Sequence

import numpy as np

from .bitcore import PatternCodebook, build_pattern_codebook, floor_log2
from .channel import complex_normal
from .errors import ConfigurationError
from .signalset import DEFAULT_ENUMERATION_CAP, BlockSignalSet

LM_KINDS = ("si-lm", "smp-lm", "ti-lm", "conventional-lm", "smp-bpsk")


@dataclass(frozen=True, eq=False)
class LmAlphabet:
    """n_M vectors of dimension n_t, all with squared norm P."""

    vectors: np.ndarray  # (n_M, n_t) complex
    P: float = 1.0
    seed: int | None = None
    distortion: float = float("nan")

    def __post_init__(self):
        v = np.asarray(self.vectors, dtype=complex)
        if v.ndim != 2:
            raise ConfigurationError("alphabet vectors must form an (n_M, n_t) array")
        n_M = v.shape[0]
        if n_M < 1 or n_M & (n_M - 1):
            raise ConfigurationError(f"alphabet size must be a power of two, got {n_M}")
        norms = np.sum(np.abs(v) ** 2, axis=1)
        if not np.allclose(norms, self.P, rtol=0, atol=1e-9 * max(1.0, self.P)):
            raise ConfigurationError("alphabet vectors must lie on the radius-sqrt(P) sphere")
        v.setflags(write=False)
        object.__setattr__(self, "vectors", v)

    @property
    def n_M(self) -> int:
        return self.vectors.shape[0]

    @property
    def n_t(self) -> int:
        return self.vectors.shape[1]

    def min_distance(self) -> float:
        v = self.vectors
        d = np.sqrt(np.maximum(_sq_dists(v, v, self.P), 0.0))
        np.fill_diagonal(d, np.inf)
        return float(d.min())


def _sq_dists(X: np.ndarray, C: np.ndarray, P: float) -> np.ndarray:
    # ||x - c||^2 = 2P - 2 Re(c^H x) for points on the same sphere
    return 2.0 * P - 2.0 * (X @ C.conj().T).real


def sample_hypersphere(n_t: int, P: float, count: int, rng: np.random.Generator) -> np.ndarray:
    """``count`` vectors uniform on {s in C^{n_t}: ||s||^2 = P}, shape (count, n_t)."""
    if count < 1 or n_t < 1:
        raise ConfigurationError("need count >= 1 and n_t >= 1")
    g = complex_normal(rng, (count, n_t))
    return g / np.linalg.norm(g, axis=1, keepdims=True) * np.sqrt(P)


def _kmeanspp(X: np.ndarray, n_M: int, P: float, rng: np.random.Generator) -> np.ndarray:
    count = X.shape[0]
    centers = np.empty((n_M, X.shape[1]), dtype=complex)
    centers[0] = X[rng.integers(count)]
    closest = _sq_dists(X, centers[:1], P)[:, 0]
    for c in range(1, n_M):
        w = np.maximum(closest, 0.0)
        total = w.sum()
        idx = rng.choice(count, p=w / total) if total > 0 else rng.integers(count)
        centers[c] = X[idx]
        np.minimum(closest, _sq_dists(X, centers[c:c + 1], P)[:, 0], out=closest)
    return centers


def kmeans_run(samples, n_M: int, max_iter: int = 200, tol: float = 1e-6,
               rng: np.random.Generator | None = None) -> tuple[np.ndarray, list[float]]:
    """One spherical k-means run; returns centroids and the distortion after each assignment."""
    X = np.asarray(samples, dtype=complex)
    if X.ndim != 2:
        raise ConfigurationError("samples must be a (count, n_t) array")
    count = X.shape[0]
    if not 1 <= n_M <= count:
        raise ConfigurationError(f"need 1 <= n_M <= #samples, got n_M={n_M}, #samples={count}")
    rng = np.random.default_rng() if rng is None else rng
    P = float(np.mean(np.sum(np.abs(X) ** 2, axis=1)))
    radius = math.sqrt(P)
    if n_M == count:
        return X.copy(), [0.0]

    C = _kmeanspp(X, n_M, P, rng)
    history: list[float] = []
    for _ in range(max_iter):
        sims = (X @ C.conj().T).real
        assign = np.argmax(sims, axis=1)
        dist = 2.0 * P - 2.0 * sims[np.arange(count), assign]
        history.append(float(np.maximum(dist, 0).sum()))
        sums = np.zeros_like(C)
        np.add.at(sums, assign, X)
        norms = np.linalg.norm(sums, axis=1)
        new = C.copy()
        ok = norms > 1e-12 * radius
        new[ok] = sums[ok] / norms[ok, None] * radius
        # Empty or degenerate clusters take over the worst-served samples.
        if not ok.all():
            far = np.argsort(-dist, kind="stable")
            for c, s in zip(np.flatnonzero(~ok), far):
                new[c] = X[s]
        move = float(np.max(np.linalg.norm(new - C, axis=1)))
        C = new
        if move < tol * radius:
            break
    sims = (X @ C.conj().T).real
    history.append(float(np.maximum(2.0 * P - 2.0 * sims.max(axis=1), 0).sum()))
    return C, history


def spherical_kmeans(samples, n_M: int, max_iter: int = 200, tol: float = 1e-6,
                     rng: np.random.Generator | None = None, restarts: int = 1) -> LmAlphabet:
    """Cluster sphere samples into an n_M-point alphabet, keeping the best of ``restarts`` runs."""
    X = np.asarray(samples, dtype=complex)
    rng = np.random.default_rng() if rng is None else rng
    P = float(np.mean(np.sum(np.abs(X) ** 2, axis=1)))
    best, best_d = None, np.inf
    for _ in range(max(1, restarts)):
        C, hist = kmeans_run(X, n_M, max_iter, tol, rng)
        if hist[-1] < best_d:
            best, best_d = C, hist[-1]
    # Re-project so the norm constraint holds to rounding regardless of sample spread.
    best = best / np.linalg.norm(best, axis=1, keepdims=True) * math.sqrt(P)
    return LmAlphabet(vectors=best, P=P, distortion=best_d)


def design_lm_alphabet(n_t: int, n_M: int, P: float = 1.0, seed: int = 0, samples_per_point: int = 400,
                       max_iter: int = 200, tol: float = 1e-6, restarts: int = 3) -> LmAlphabet:
    """Sample the sphere and cluster it: the full alphabet design recipe, seeded."""
    rng = np.random.default_rng(seed)
    samples = sample_hypersphere(n_t, P, samples_per_point * n_M, rng)
    alpha = spherical_kmeans(samples, n_M, max_iter=max_iter, tol=tol, rng=rng, restarts=restarts)
    return LmAlphabet(vectors=alpha.vectors / np.linalg.norm(alpha.vectors, axis=1, keepdims=True) * math.sqrt(P),
                      P=P, seed=seed, distortion=alpha.distortion)


def paspr(alphabet) -> float:
    """Peak to average sum power ratio: max ||v||^2 / mean ||v||^2."""
    v = alphabet.vectors if isinstance(alphabet, LmAlphabet) else np.asarray(alphabet)
    if v.size == 0:
        raise ValueError("alphabet is empty")
    p = np.sum(np.abs(v) ** 2, axis=-1)
    return float(p.max() / p.mean())


def save_alphabet(path, alphabet: LmAlphabet) -> None:
    """Header line (n_t, n_M, P, seed) then one row of interleaved re/im pairs per vector."""
    seed = -1 if alphabet.seed is None else alphabet.seed
    lines = [f"# n_t={alphabet.n_t} n_M={alphabet.n_M} P={alphabet.P!r} seed={seed}"]
    for vec in alphabet.vectors:
        pairs = np.column_stack([vec.real, vec.imag]).ravel()
        lines.append(" ".join(f"{x:.17e}" for x in pairs))
    Path(path).write_text("\n".join(lines) + "\n")


def load_alphabet(path) -> LmAlphabet:
    lines = Path(path).read_text().splitlines()
    if not lines or not lines[0].startswith("#"):
        raise ConfigurationError(f"{path}: missing alphabet header")
    header = dict(item.split("=", 1) for item in lines[0].lstrip("# ").split())
    n_t, n_M, seed = int(header["n_t"]), int(header["n_M"]), int(header["seed"])
    vals = np.array([[float(x) for x in ln.split()] for ln in lines[1:] if ln.strip()])
    if vals.shape != (n_M, 2 * n_t):
        raise ConfigurationError(f"{path}: expected {n_M} rows of {2 * n_t} numbers, got {vals.shape}")
    return LmAlphabet(vectors=vals[:, 0::2] + 1j * vals[:, 1::2], P=float(header["P"]),
                      seed=None if seed < 0 else seed)


# ---------------------------------------------------------------------------
# Indexed LM schemes
# ---------------------------------------------------------------------------

@dataclass(frozen=True, eq=False)
class LmConfig:
    """One load-modulation scheme instance.

    kinds:
        si-lm            n_K of n_L LM-TUs active per channel use, flat fading
        conventional-lm  a single LM-TU (SI-LM with n_L = n_K = 1)
        smp-lm           all n_L LM-TUs active, independent LM vectors
        ti-lm            K of N slots active per frame, L-tap selective fading
        smp-bpsk         n_t antennas each sending BPSK, no load modulation
    """

    kind: str
    n_t: int
    alphabet: LmAlphabet | None = None
    n_L: int = 1
    n_K: int = 1
    N: int = 1
    K: int = 1
    L: int = 1
    n_r: int = 1
    pattern_codebook: PatternCodebook | None = None
    energy_norm: str = "per_slot"  # TI-LM only: per_frame spreads N slots' worth of energy over the K active ones
    signal_set: BlockSignalSet = field(init=False, repr=False)

    def __post_init__(self):
        kind = self.kind.lower()
        if kind not in LM_KINDS:
            raise ConfigurationError(f"unknown LM scheme {self.kind!r}; expected one of {LM_KINDS}")
        object.__setattr__(self, "kind", kind)
        if self.energy_norm not in ("per_slot", "per_frame"):
            raise ConfigurationError(f"energy_norm must be per_slot or per_frame, got {self.energy_norm!r}")
        if kind == "conventional-lm":
            object.__setattr__(self, "n_L", 1)
            object.__setattr__(self, "n_K", 1)
        if kind == "smp-lm":
            object.__setattr__(self, "n_K", self.n_L)
        if kind != "smp-bpsk":
            if self.alphabet is None:
                raise ConfigurationError(f"{kind} needs an LM alphabet")
            if self.alphabet.n_t != self.n_t:
                raise ConfigurationError(f"alphabet dimension {self.alphabet.n_t} != n_t={self.n_t}")
        if not 1 <= self.n_K <= self.n_L:
            raise ConfigurationError(f"need 1 <= n_K <= n_L, got n_L={self.n_L}, n_K={self.n_K}")
        if kind == "ti-lm":
            if not 1 <= self.K <= self.N:
                raise ConfigurationError(f"TI-LM needs 1 <= K <= N, got N={self.N}, K={self.K}")
            if self.L > self.N:
                raise ConfigurationError(f"L={self.L} taps cannot exceed N={self.N} slots")
        blocks, active = self._blocks()
        cb = self.pattern_codebook
        if cb is None:
            cb = build_pattern_codebook(blocks, active)
            object.__setattr__(self, "pattern_codebook", cb)
        elif (cb.N, cb.K) != (blocks, active):
            raise ConfigurationError(f"pattern codebook is for ({cb.N}, {cb.K}), scheme needs ({blocks}, {active})")
        if kind == "smp-bpsk":
            block_alpha = np.array([[1.0 + 0j], [-1.0 + 0j]])
        else:
            block_alpha = np.asarray(self.alphabet.vectors)
        object.__setattr__(self, "signal_set", BlockSignalSet(cb, block_alpha.copy()))

    def _blocks(self) -> tuple[int, int]:
        if self.kind == "ti-lm":
            return self.N, self.K
        if self.kind == "smp-bpsk":
            return self.n_t, self.n_t
        return self.n_L, self.n_K

    @property
    def n_M(self) -> int:
        return 2 if self.kind == "smp-bpsk" else self.alphabet.n_M

    @property
    def selective(self) -> bool:
        return self.kind == "ti-lm"

    @property
    def tx_power(self) -> float:
        """Radiated sum power per channel use (per active slot for TI-LM)."""
        if self.kind == "smp-bpsk":
            return float(self.n_t)
        per_block = self.alphabet.P
        return per_block if self.kind == "ti-lm" else per_block * self.n_K

    @property
    def channel_columns(self) -> int:
        return self.signal_set.length

    @property
    def label(self) -> str:
        if self.kind == "ti-lm":
            norm = ",per_frame" if self.energy_norm == "per_frame" else ""
            return f"ti-lm(N={self.N},K={self.K},L={self.L},nt={self.n_t},nM={self.n_M},nr={self.n_r}{norm})"
        if self.kind == "smp-bpsk":
            return f"smp-bpsk(nt={self.n_t},nr={self.n_r})"
        return f"{self.kind}(nL={self.n_L},nK={self.n_K},nt={self.n_t},nM={self.n_M},nr={self.n_r})"


def lm_bits(cfg: LmConfig) -> int:
    return cfg.signal_set.frame_bits


def lm_rate(cfg: LmConfig) -> Fraction:
    """Bits per channel use of any LM scheme."""
    if cfg.kind == "ti-lm":
        return Fraction(lm_bits(cfg), cfg.N + cfg.L - 1)
    return Fraction(lm_bits(cfg))


def si_lm_rate(cfg: LmConfig) -> Fraction:
    """floor(log2 C(n_L, n_K)) + n_K log2 n_M."""
    if cfg.kind not in ("si-lm", "conventional-lm", "smp-lm"):
        raise ConfigurationError(f"si_lm_rate applies to spatial LM schemes, not {cfg.kind}")
    return Fraction(floor_log2(math.comb(cfg.n_L, cfg.n_K)) + cfg.n_K * floor_log2(cfg.n_M))


def ti_lm_rate(cfg: LmConfig) -> Fraction:
    """(floor(log2 C(N, K)) + K log2 n_M) / (N + L - 1)."""
    if cfg.kind != "ti-lm":
        raise ConfigurationError(f"ti_lm_rate applies to TI-LM, not {cfg.kind}")
    return Fraction(floor_log2(math.comb(cfg.N, cfg.K)) + cfg.K * floor_log2(cfg.n_M), cfg.N + cfg.L - 1)


def _encode(cfg: LmConfig, bits, kinds: Sequence[str]) -> np.ndarray:
    if cfg.kind not in kinds:
        raise ConfigurationError(f"encoder for {kinds} called with a {cfg.kind} config")
    bits = np.asarray(bits)
    if bits.ndim != 1 or bits.size != lm_bits(cfg):
        raise ValueError(f"{cfg.kind} takes {lm_bits(cfg)} bits per vector, got {bits.size}")
    return cfg.signal_set.encode(bits)


def si_lm_encode(bits, cfg: LmConfig) -> np.ndarray:
    """LAP bits, then log2 n_M bits per active LM-TU; returns an n_L*n_t vector."""
    return _encode(cfg, bits, ("si-lm", "conventional-lm", "smp-lm"))


def ti_lm_encode(bits, cfg: LmConfig) -> np.ndarray:
    """TAP bits, then log2 n_M bits per active slot; returns an N*n_t vector."""
    return _encode(cfg, bits, ("ti-lm",))


def lm_encode(bits, cfg: LmConfig) -> np.ndarray:
    return _encode(cfg, bits, LM_KINDS)


def lm_decode(vector, cfg: LmConfig) -> np.ndarray:
    """Inverse of the encoders; raises DecodeError for non-members."""
    return cfg.signal_set.decode(vector)


si_lm_decode = lm_decode
ti_lm_decode = lm_decode


def enumerate_lm_set(cfg: LmConfig, cap: int = DEFAULT_ENUMERATION_CAP) -> Iterator[np.ndarray]:
    """Every transmit vector of the scheme, in bit-string order."""
    ss = cfg.signal_set
    for pidx, labels in ss.enumerate(cap):
        yield ss.vectors(pidx, labels)
