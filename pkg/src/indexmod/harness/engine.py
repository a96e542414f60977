"""Monte Carlo BER engine.

Frames are simulated in fixed-size chunks. Chunk ``c`` of grid point ``i``
draws everything (bits, channel, noise) from its own generator seeded by
``SeedSequence(master_seed, spawn_key=(i, c))``, so a record depends only on
the experiment and not on the order or parallelism in which chunks run.
"""

from __future__ import annotations

import dataclasses
import logging
import time
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass

import numpy as np

from ..channel import assemble_block_circulant, complex_normal, snr_to_sigma2
from ..detect import algorithm1_detect, ml_search
from ..errors import ConfigurationError
from ..loadmod import LmConfig
from ..schemes import SchemeConfig
from ..signalset import DEFAULT_ENUMERATION_CAP
from .config import Experiment

log = logging.getLogger(__name__)

ML_CHUNK = 64
SR_CHUNK = 16


@dataclass(frozen=True)
class BerRecord:
    scheme: str
    detector: str
    snr_db: float
    n_r: int
    frames: int
    bits: int
    bit_errors: int
    ber: float
    seed: int
    elapsed_seconds: float = 0.0


def chunk_rng(master_seed: int, point_index: int, chunk_index: int) -> np.random.Generator:
    return np.random.default_rng(np.random.SeedSequence(master_seed, spawn_key=(point_index, chunk_index)))


def _chunk_size(exp: Experiment) -> int:
    if exp.chunk > 0:
        return exp.chunk
    return ML_CHUNK if exp.detector == "ml" else SR_CHUNK


def _is_selective(scheme) -> bool:
    return isinstance(scheme, SchemeConfig) or scheme.selective


def check_compatible(exp: Experiment) -> None:
    """Raise ConfigurationError before any trial if the detector cannot serve the scheme."""
    scheme = exp.scheme
    if exp.detector == "ml":
        scheme.signal_set.check_cap(DEFAULT_ENUMERATION_CAP)
    elif isinstance(scheme, LmConfig):
        raise ConfigurationError("sparse-recovery detectors need an index-modulation scheme")
    if _is_selective(scheme) and scheme.L > scheme.signal_set.n_blocks:
        raise ConfigurationError(f"L={scheme.L} exceeds N={scheme.signal_set.n_blocks}")


def simulate_chunk(exp: Experiment, sigma2: float, rng: np.random.Generator, count: int) -> int:
    """Run ``count`` frames and return the number of bit errors."""
    scheme = exp.scheme
    ss = scheme.signal_set
    bits = rng.integers(0, 2, size=(count, ss.frame_bits), dtype=np.uint8)
    X = ss.vectors(*ss.split_bits(bits))
    n_r = scheme.n_r
    if _is_selective(scheme):
        L = scheme.L
        taps = complex_normal(rng, (count, L, n_r, ss.block_dim), 1.0 / L)
        rows = ss.n_blocks * n_r
    else:
        taps = None
        H = complex_normal(rng, (count, n_r, ss.length))
        rows = n_r
    noise = complex_normal(rng, (count, rows), sigma2)

    if exp.detector == "ml":
        if taps is not None:
            H = assemble_block_circulant(taps, ss.n_blocks)
        Y = np.einsum("bmn,bn->bm", H, X) + noise
        flat, _ = ml_search(Y, H, ss)
        est = ss.join_bits(*ss.unflatten(flat))
        return int(np.count_nonzero(est != bits))

    sr = exp.detector.split("-", 1)[1]
    errors = 0
    for i in range(count):
        Hi = assemble_block_circulant(taps[i], ss.n_blocks) if taps is not None else H[i]
        y = Hi @ X[i] + noise[i]
        res = algorithm1_detect(y, Hi, scheme, sr=sr)
        errors += int(np.count_nonzero(res.bits != bits[i]))
    return errors


def _run_chunk(args):
    exp, sigma2, point_index, chunk_index, count = args
    rng = chunk_rng(exp.master_seed, point_index, chunk_index)
    return count, simulate_chunk(exp, sigma2, rng, count)


def run_ber_point(exp: Experiment, snr_db: float, point_index: int = 0, sigma2: float | None = None,
                  workers: int = 1) -> BerRecord:
    """Simulate one grid point until ``min_errors`` bit errors or ``max_frames`` frames.

    ``sigma2`` overrides the noise variance implied by ``snr_db`` (0 gives a
    noiseless run).
    """
    check_compatible(exp)
    if sigma2 is None:
        sigma2 = snr_to_sigma2(snr_db, exp.scheme).sigma2
    chunk = _chunk_size(exp)
    frames = errors = 0
    c = 0
    t0 = time.perf_counter()
    pool = ProcessPoolExecutor(max_workers=workers) if workers > 1 else None
    try:
        while frames < exp.max_frames and errors < exp.min_errors:
            window = []
            for w in range(max(1, workers)):
                start = (c + w) * chunk
                if start >= exp.max_frames:
                    break
                window.append((exp, sigma2, point_index, c + w, min(chunk, exp.max_frames - start)))
            results = pool.map(_run_chunk, window) if pool else map(_run_chunk, window)
            for count, e in results:
                frames += count
                errors += e
                c += 1
                if frames >= exp.max_frames or errors >= exp.min_errors:
                    break
    finally:
        if pool:
            pool.shutdown(cancel_futures=True)
    nbits = frames * exp.scheme.signal_set.frame_bits
    rec = BerRecord(scheme=exp.name, detector=exp.detector, snr_db=float(snr_db), n_r=exp.scheme.n_r,
                    frames=frames, bits=nbits, bit_errors=errors, ber=errors / nbits if nbits else 0.0,
                    seed=exp.master_seed, elapsed_seconds=round(time.perf_counter() - t0, 3))
    log.info("%s %s snr=%g n_r=%d: %d errors / %d bits (BER %.3g)", rec.scheme, rec.detector, rec.snr_db,
             rec.n_r, rec.bit_errors, rec.bits, rec.ber)
    return rec


def run_sweep(exp: Experiment, workers: int = 1) -> list[BerRecord]:
    """One record per SNR grid point; stops early once BER drops below ``exp.stop_ber``."""
    records = []
    for i, snr in enumerate(exp.snr_grid_db):
        rec = run_ber_point(exp, snr, point_index=i, workers=workers)
        records.append(rec)
        if exp.stop_ber and rec.ber < exp.stop_ber:
            break
    return records


def run_nr_sweep(exp: Experiment, snr_db: float, nr_grid=None, workers: int = 1) -> list[BerRecord]:
    """One record per receive-antenna count at a fixed SNR."""
    grid = exp.nr_grid if nr_grid is None else tuple(nr_grid)
    records = []
    for i, n_r in enumerate(grid):
        sub = exp.with_(scheme=dataclasses.replace(exp.scheme, n_r=int(n_r)))
        rec = run_ber_point(sub, snr_db, point_index=i, workers=workers)
        records.append(rec)
        if exp.stop_ber and rec.ber < exp.stop_ber:
            break
    return records
