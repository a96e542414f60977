"""Monte Carlo BER harness: experiment files, engine, results and CLI."""

from .config import DETECTORS, Experiment, experiment_from_kv, load_experiment, parse_grid, parse_kv
from .engine import BerRecord, chunk_rng, run_ber_point, run_nr_sweep, run_sweep
from .results import HEADER, emit_results, format_csv, parse_results, read_results

__all__ = [
    "DETECTORS", "Experiment", "experiment_from_kv", "load_experiment", "parse_grid", "parse_kv",
    "BerRecord", "chunk_rng", "run_ber_point", "run_nr_sweep", "run_sweep",
    "HEADER", "emit_results", "format_csv", "parse_results", "read_results",
]
