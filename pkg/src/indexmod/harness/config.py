"""Experiment files: flat ``key = value`` text with ``#`` comments.

Recognised keys::

    scheme      ti-sm | ti-mbm | sm-mbm | ti-sm-mbm | si-lm | smp-lm | ti-lm
                | conventional-lm | smp-bpsk
    detector    ml | alg1-omp | alg1-cosamp | alg1-sp
    N K L n_t m_rf mod_order n_r energy_norm taps        (index-modulation schemes)
    n_L n_K n_M P alphabet alphabet_seed samples_per_point  (load modulation; TI-LM also takes
                energy_norm)
    snr         a:b:step or comma list (dB)
    nr          a:b[:step] or comma list (receive-antenna sweep)
    min_errors max_frames seed chunk stop_ber label
"""

from __future__ import annotations

import functools
from dataclasses import dataclass, field, replace
from pathlib import Path

import numpy as np

from ..errors import ConfigurationError
from ..loadmod import LM_KINDS, LmAlphabet, LmConfig, design_lm_alphabet, load_alphabet
from ..schemes import KINDS, SchemeConfig

DETECTORS = ("ml", "alg1-omp", "alg1-cosamp", "alg1-sp")
DEFAULT_MIN_ERRORS = 200
DEFAULT_MAX_FRAMES = 200_000


@dataclass(frozen=True)
class Experiment:
    scheme: SchemeConfig | LmConfig
    detector: str = "ml"
    snr_grid_db: tuple[float, ...] = (0.0,)
    min_errors: int = DEFAULT_MIN_ERRORS
    max_frames: int = DEFAULT_MAX_FRAMES
    master_seed: int = 0
    nr_grid: tuple[int, ...] = ()
    chunk: int = 0  # 0: detector-dependent default
    stop_ber: float = 0.0  # sweeps stop after the first point with BER below this
    label: str = ""
    source: str = field(default="", compare=False)

    def __post_init__(self):
        if self.detector not in DETECTORS:
            raise ConfigurationError(f"unknown detector {self.detector!r}; expected one of {DETECTORS}")
        if self.min_errors < 1 or self.max_frames < 1:
            raise ConfigurationError("stop rule needs min_errors >= 1 and max_frames >= 1")
        if isinstance(self.scheme, LmConfig) and self.detector != "ml":
            raise ConfigurationError("load-modulation schemes support ML detection only")

    @property
    def name(self) -> str:
        return self.label or self.scheme.label

    def with_(self, **changes) -> "Experiment":
        return replace(self, **changes)


def parse_grid(text: str, integer: bool = False) -> tuple:
    """``a:b:step`` (inclusive of b), ``a:b`` (step 1) or a comma list."""
    text = text.strip()
    if not text:
        return ()
    if ":" in text:
        parts = [float(p) for p in text.split(":")]
        if len(parts) == 2:
            parts.append(1.0)
        if len(parts) != 3 or parts[2] <= 0:
            raise ConfigurationError(f"bad grid {text!r}; use a:b:step with step > 0")
        a, b, step = parts
        n = int(np.floor((b - a) / step + 1e-9)) + 1
        vals = [a + i * step for i in range(max(n, 0))]
    else:
        vals = [float(p) for p in text.split(",") if p.strip()]
    if integer:
        return tuple(int(round(v)) for v in vals)
    return tuple(round(v, 10) for v in vals)


def parse_kv(text: str) -> dict[str, str]:
    out: dict[str, str] = {}
    for lineno, raw in enumerate(text.splitlines(), 1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise ConfigurationError(f"line {lineno}: expected 'key = value', got {raw.strip()!r}")
        key, value = (s.strip() for s in line.split("=", 1))
        out[key] = value
    return out


@functools.lru_cache(maxsize=32)
def _designed_alphabet(n_t: int, n_M: int, P: float, seed: int, spp: int) -> LmAlphabet:
    return design_lm_alphabet(n_t, n_M, P=P, seed=seed, samples_per_point=spp)


def _int(kv, key, default=None):
    if key not in kv:
        if default is None:
            raise ConfigurationError(f"missing required key {key!r}")
        return default
    try:
        return int(kv[key])
    except ValueError:
        raise ConfigurationError(f"{key} must be an integer, got {kv[key]!r}") from None


def scheme_from_kv(kv: dict[str, str], base_dir: Path | None = None):
    kind = kv.get("scheme", "").lower()
    if kind in KINDS:
        taps = None
        if "taps" in kv:
            taps = [[int(c) for c in tok.strip()] for tok in kv["taps"].split(",")]
        params = dict(N=_int(kv, "N"), K=_int(kv, "K"), L=_int(kv, "L", 1), n_t=_int(kv, "n_t", 1),
                      m_rf=_int(kv, "m_rf", 0), mod_order=_int(kv, "mod_order", 2), n_r=_int(kv, "n_r", 1),
                      energy_norm=kv.get("energy_norm", "per_slot"))
        return SchemeConfig.from_params(kind, taps=taps, **params)
    if kind in LM_KINDS:
        n_t = _int(kv, "n_t")
        alphabet = None
        if kind != "smp-bpsk":
            if "alphabet" in kv:
                path = Path(kv["alphabet"])
                if not path.is_absolute() and base_dir is not None:
                    path = base_dir / path
                if not path.exists():
                    raise ConfigurationError(f"alphabet file not found: {path}")
                alphabet = load_alphabet(path)
            else:
                alphabet = _designed_alphabet(n_t, _int(kv, "n_M"), float(kv.get("P", "1")),
                                              _int(kv, "alphabet_seed", 0), _int(kv, "samples_per_point", 400))
            if "n_M" in kv and alphabet.n_M != _int(kv, "n_M"):
                raise ConfigurationError(f"alphabet has {alphabet.n_M} vectors but n_M = {kv['n_M']}")
        return LmConfig(kind=kind, n_t=n_t, alphabet=alphabet, n_L=_int(kv, "n_L", 1), n_K=_int(kv, "n_K", 1),
                        N=_int(kv, "N", 1), K=_int(kv, "K", 1), L=_int(kv, "L", 1), n_r=_int(kv, "n_r", 1),
                        energy_norm=kv.get("energy_norm", "per_slot"))
    raise ConfigurationError(f"unknown or missing scheme {kind!r}; expected one of {KINDS + LM_KINDS}")


def experiment_from_kv(kv: dict[str, str], base_dir: Path | None = None, source: str = "") -> Experiment:
    scheme = scheme_from_kv(kv, base_dir)
    return Experiment(
        scheme=scheme,
        detector=kv.get("detector", "ml"),
        snr_grid_db=parse_grid(kv.get("snr", "0")),
        min_errors=_int(kv, "min_errors", DEFAULT_MIN_ERRORS),
        max_frames=_int(kv, "max_frames", DEFAULT_MAX_FRAMES),
        master_seed=_int(kv, "seed", 0),
        nr_grid=parse_grid(kv.get("nr", ""), integer=True),
        chunk=_int(kv, "chunk", 0) if "chunk" in kv else 0,
        stop_ber=float(kv.get("stop_ber", "0")),
        label=kv.get("label", ""),
        source=source,
    )


def load_experiment(path) -> Experiment:
    path = Path(path)
    try:
        text = path.read_text()
    except OSError as exc:
        raise ConfigurationError(f"cannot read experiment file {path}: {exc.strerror}") from None
    return experiment_from_kv(parse_kv(text), base_dir=path.parent, source=str(path))
