"""Index modulation in time, space and RF mirrors, with load-modulation alphabets.

Submodules:
    bitcore: bit/integer helpers, combinadics, pattern codebooks, QAM/PSK alphabets.
    schemes: TI-SM, TI-MBM, SM-MBM and TI-SM-MBM configs, rates, frame encode/decode.
    channel: block-circulant frequency-selective and flat Rayleigh channels, AWGN.
    detect: exhaustive ML and sparse-recovery based detection.
    loadmod: hypersphere alphabets by spherical k-means, SI-LM/TI-LM schemes.
    harness: experiment files, Monte Carlo BER engine, presets and CLI.
"""

from .bitcore import (
    ComplexAlphabet,
    PatternCodebook,
    build_pattern_codebook,
    combinadic_rank,
    combinadic_unrank,
    make_qam,
)
from .errors import ConfigurationError, DecodeError, EnumerationLimitError
from .schemes import (
    Frame,
    SchemeConfig,
    decode_frame,
    encode_frame,
    enumerate_signal_set,
    frame_bit_budget,
    scheme_rate,
    sparsity_factor,
)

__version__ = "0.1.0"

__all__ = [
    "ComplexAlphabet", "PatternCodebook", "build_pattern_codebook", "combinadic_rank", "combinadic_unrank",
    "make_qam", "ConfigurationError", "DecodeError", "EnumerationLimitError", "Frame", "SchemeConfig",
    "decode_frame", "encode_frame", "enumerate_signal_set", "frame_bit_budget", "scheme_rate", "sparsity_factor",
]
