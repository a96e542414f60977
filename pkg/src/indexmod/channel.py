"""Random channels, AWGN and SNR bookkeeping.

The frequency-selective channel is modelled after cyclic-prefix removal: an
L-tap channel acting on an N-slot frame becomes an (N n_r) x (N D)
block-circulant matrix whose block (r, c) is H_{(r - c) mod N} when that
delay is below L and zero otherwise.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from .errors import ConfigurationError

__all__ = [
    "ChannelRealization",
    "NoiseSpec",
    "complex_normal",
    "assemble_block_circulant",
    "draw_selective_channel",
    "draw_flat_channel",
    "transmit",
    "snr_to_sigma2",
    "save_channel",
    "load_channel",
]


def complex_normal(rng: np.random.Generator, shape, variance: float = 1.0) -> np.ndarray:
    """i.i.d. CN(0, variance) samples."""
    scale = np.sqrt(variance / 2.0)
    return (rng.standard_normal(shape) + 1j * rng.standard_normal(shape)) * scale


def assemble_block_circulant(taps: np.ndarray, N: int) -> np.ndarray:
    """Block-circulant matrix from taps of shape (..., L, n_r, D).

    Leading batch dimensions are preserved: the result has shape
    (..., N*n_r, N*D).
    """
    taps = np.asarray(taps)
    *batch, L, n_r, D = taps.shape
    if L > N:
        raise ConfigurationError(f"L={L} taps cannot exceed N={N} slots")
    out = np.zeros((*batch, N, n_r, N, D), dtype=complex)
    for r in range(N):
        for lag in range(L):
            out[..., r, :, (r - lag) % N, :] = taps[..., lag, :, :]
    return out.reshape(*batch, N * n_r, N * D)


@dataclass(frozen=True, eq=False)
class ChannelRealization:
    """L tap matrices (n_r x D each) of one frequency-selective channel draw."""

    taps: np.ndarray  # (L, n_r, D)
    N: int
    seed: int | None = None
    _assembled: list = field(default_factory=list, repr=False)

    @property
    def L(self) -> int:
        return self.taps.shape[0]

    @property
    def n_r(self) -> int:
        return self.taps.shape[1]

    @property
    def D(self) -> int:
        return self.taps.shape[2]

    @property
    def assembled(self) -> np.ndarray:
        if not self._assembled:
            H = assemble_block_circulant(self.taps, self.N)
            H.setflags(write=False)
            self._assembled.append(H)
        return self._assembled[0]


@dataclass(frozen=True)
class NoiseSpec:
    """Noise variance per complex receive dimension and the SNR it came from."""

    sigma2: float
    snr_db: float = float("nan")

    def __post_init__(self):
        # sigma2 = 0 is allowed as a noiseless override.
        if not self.sigma2 >= 0:
            raise ConfigurationError(f"sigma2 must be nonnegative, got {self.sigma2}")


def draw_selective_channel(n_r: int, D: int, N: int, L: int, rng: np.random.Generator) -> ChannelRealization:
    """Taps with i.i.d. CN(0, 1/L) entries (uniform power delay profile)."""
    if min(n_r, D, N, L) < 1:
        raise ConfigurationError("all channel dimensions must be >= 1")
    if L > N:
        raise ConfigurationError(f"L={L} taps cannot exceed N={N} slots")
    return ChannelRealization(taps=complex_normal(rng, (L, n_r, D), 1.0 / L), N=N)


def draw_flat_channel(n_r: int, n_cols: int, rng: np.random.Generator) -> np.ndarray:
    """n_r x n_cols matrix of i.i.d. CN(0, 1) gains."""
    if n_r < 1 or n_cols < 1:
        raise ConfigurationError("channel dimensions must be >= 1")
    return complex_normal(rng, (n_r, n_cols))


def transmit(H, x, noise: NoiseSpec, rng: np.random.Generator | None = None) -> np.ndarray:
    """y = H x + n with n ~ CN(0, sigma2 I).

    ``H`` may be a matrix or a :class:`ChannelRealization`; ``x`` may be a dense
    vector or a sparse frame (anything with ``support``/``values``/``length``),
    in which case only the support columns are touched.
    """
    if isinstance(H, ChannelRealization):
        H = H.assembled
    H = np.asarray(H)
    if hasattr(x, "support"):
        if x.length != H.shape[1]:
            raise ValueError(f"frame length {x.length} does not match H with {H.shape[1]} columns")
        y = H[:, x.support] @ np.asarray(x.values)
    else:
        x = np.asarray(x)
        if x.ndim != 1 or x.size != H.shape[1]:
            raise ValueError(f"vector of shape {x.shape} does not match H with {H.shape[1]} columns")
        y = H @ x
    if noise.sigma2 > 0:
        if rng is None:
            raise ValueError("a generator is required when sigma2 > 0")
        y = y + complex_normal(rng, y.shape, noise.sigma2)
    return y


def snr_to_sigma2(snr_db: float, cfg=None) -> NoiseSpec:
    """Noise variance for unit average energy per active slot.

    Under ``per_frame`` normalisation the frame energy is spread as if all N
    slots were active, i.e. active slots are boosted by N/K; that is applied
    here as an equivalent N/K reduction of the noise variance. Configs that
    expose ``tx_power`` (load modulation) get sigma^2 scaled by it, so the SNR
    is per unit radiated power per channel use.
    """
    if not np.isfinite(snr_db):
        raise ValueError(f"SNR must be finite, got {snr_db}")
    sigma2 = 10.0 ** (-snr_db / 10.0)
    if cfg is not None and getattr(cfg, "energy_norm", "per_slot") == "per_frame":
        sigma2 *= cfg.K / cfg.N
    sigma2 *= float(getattr(cfg, "tx_power", 1.0))
    return NoiseSpec(sigma2=sigma2, snr_db=float(snr_db))


def save_channel(path, realization: ChannelRealization) -> None:
    """Text dump: header line then one row of interleaved re/im pairs per tap row."""
    path = Path(path)
    seed = -1 if realization.seed is None else realization.seed
    lines = [f"# N={realization.N} L={realization.L} n_r={realization.n_r} D={realization.D} seed={seed}"]
    for tap in realization.taps:
        for row in tap:
            pairs = np.column_stack([row.real, row.imag]).ravel()
            lines.append(",".join(f"{v:.17g}" for v in pairs))
    path.write_text("\n".join(lines) + "\n")


def load_channel(path) -> ChannelRealization:
    path = Path(path)
    text = path.read_text().splitlines()
    header = dict(item.split("=") for item in text[0].lstrip("# ").split())
    N, L, n_r, D, seed = (int(header[k]) for k in ("N", "L", "n_r", "D", "seed"))
    vals = np.array([[float(v) for v in line.split(",")] for line in text[1:] if line.strip()])
    taps = (vals[:, 0::2] + 1j * vals[:, 1::2]).reshape(L, n_r, D)
    return ChannelRealization(taps=taps, N=N, seed=None if seed < 0 else seed)
