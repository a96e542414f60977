"""Command-line entry point (``indexmod``)."""

from __future__ import annotations

import argparse
import logging
import sys
from importlib import resources
from pathlib import Path

from ..errors import ConfigurationError, EnumerationLimitError
from ..loadmod import LmConfig, design_lm_alphabet, load_alphabet, lm_rate, paspr, save_alphabet
from ..schemes import scheme_rate
from .config import Experiment, load_experiment, parse_grid
from .engine import run_nr_sweep, run_sweep
from .results import emit_results

log = logging.getLogger("indexmod")


def preset_root() -> Path:
    return Path(str(resources.files("indexmod.harness") / "presets"))


def preset_names() -> list[str]:
    return sorted(p.name for p in preset_root().iterdir() if p.is_dir() and any(p.glob("*.cfg")))


def preset_files(name: str) -> list[Path]:
    folder = preset_root() / name
    files = sorted(folder.glob("*.cfg")) if folder.is_dir() else []
    if not files:
        raise ConfigurationError(f"unknown preset {name!r}; available: {', '.join(preset_names())}")
    return files


def rate_of(scheme):
    return lm_rate(scheme) if isinstance(scheme, LmConfig) else scheme_rate(scheme)


def _format_rate(r) -> str:
    return f"{float(r):.6g}" if r.denominator != 1 else str(r.numerator)


def run_experiment(exp: Experiment, workers: int = 1):
    """nr sweep at the first SNR when the experiment has an ``nr`` grid, SNR sweep otherwise."""
    if exp.nr_grid:
        return run_nr_sweep(exp, exp.snr_grid_db[0], workers=workers)
    return run_sweep(exp, workers=workers)


def _cmd_rate(args):
    exp = load_experiment(args.config)
    r = rate_of(exp.scheme)
    print(f"{exp.name}: {_format_rate(r)} bpcu ({r})")


def _apply_overrides(exp: Experiment, args) -> Experiment:
    changes = {}
    if getattr(args, "snr", None):
        changes["snr_grid_db"] = parse_grid(args.snr)
    if getattr(args, "seed", None) is not None:
        changes["master_seed"] = args.seed
    if getattr(args, "min_errors", None) is not None:
        changes["min_errors"] = args.min_errors
    if getattr(args, "max_frames", None) is not None:
        changes["max_frames"] = args.max_frames
    return exp.with_(**changes) if changes else exp


def _cmd_simulate(args):
    exp = _apply_overrides(load_experiment(args.config), args)
    if not exp.snr_grid_db:
        raise ConfigurationError("empty SNR grid")
    emit_results(run_sweep(exp, workers=args.workers), args.out, json_mirror=args.json)


def _cmd_sweep_nr(args):
    exp = _apply_overrides(load_experiment(args.config), argparse.Namespace(
        seed=args.seed, min_errors=args.min_errors, max_frames=args.max_frames))
    grid = parse_grid(args.nr, integer=True) if args.nr else exp.nr_grid
    snr = float(args.snr) if args.snr is not None else exp.snr_grid_db[0]
    emit_results(run_nr_sweep(exp, snr, grid, workers=args.workers), args.out, json_mirror=args.json)


def _cmd_lm_alphabet(args):
    alpha = design_lm_alphabet(args.nt, args.nm, P=args.P, seed=args.seed,
                               samples_per_point=args.samples_per_point, restarts=args.restarts)
    save_alphabet(args.out, alpha)
    print(f"wrote {args.out}: n_t={alpha.n_t} n_M={alpha.n_M} min distance {alpha.min_distance():.6f}")


def _cmd_paspr(args):
    print(repr(paspr(load_alphabet(args.file))))


def _cmd_presets(args):
    if args.action == "list":
        for name in preset_names():
            print(f"{name}: " + " ".join(p.stem for p in preset_files(name)))
        return
    if not args.name:
        raise ConfigurationError("presets run needs a preset name")
    records = []
    for path in preset_files(args.name):
        exp = _apply_overrides(load_experiment(path), args)
        log.info("running %s", path.name)
        records.extend(run_experiment(exp, workers=args.workers))
    emit_results(records, args.out, json_mirror=args.json)


def _add_run_options(p, snr=True):
    if snr:
        p.add_argument("--snr", help="SNR grid in dB, a:b:step or comma list")
    p.add_argument("--seed", type=int, help="master seed")
    p.add_argument("--min-errors", type=int, dest="min_errors")
    p.add_argument("--max-frames", type=int, dest="max_frames")
    p.add_argument("--workers", type=int, default=1, help="worker processes")
    p.add_argument("--out", help="CSV destination (default stdout)")
    p.add_argument("--json", action="store_true", help="also write a .json mirror next to --out")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="indexmod", description="Index-modulation BER simulator.")
    parser.add_argument("-v", "--verbose", action="store_true", help="log progress to stderr")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("rate", help="print the rate of a config in bits per channel use")
    p.add_argument("config")
    p.set_defaults(func=_cmd_rate)

    p = sub.add_parser("simulate", help="BER versus SNR")
    p.add_argument("config")
    _add_run_options(p)
    p.set_defaults(func=_cmd_simulate)

    p = sub.add_parser("sweep-nr", help="BER versus number of receive antennas at fixed SNR")
    p.add_argument("config")
    p.add_argument("--snr", type=float, help="SNR in dB (default: first SNR of the config)")
    p.add_argument("--nr", help="receive-antenna grid, a:b[:step] or comma list")
    _add_run_options(p, snr=False)
    p.set_defaults(func=_cmd_sweep_nr)

    p = sub.add_parser("lm-alphabet", help="design a load-modulation alphabet by spherical k-means")
    p.add_argument("--nt", type=int, required=True)
    p.add_argument("--nm", type=int, required=True)
    p.add_argument("--P", type=float, default=1.0)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--samples-per-point", type=int, default=400, dest="samples_per_point")
    p.add_argument("--restarts", type=int, default=3)
    p.add_argument("--out", required=True)
    p.set_defaults(func=_cmd_lm_alphabet)

    p = sub.add_parser("paspr", help="peak to average sum power ratio of an alphabet file")
    p.add_argument("file")
    p.set_defaults(func=_cmd_paspr)

    p = sub.add_parser("presets", help="list or run the shipped experiment presets")
    p.add_argument("action", choices=("list", "run"))
    p.add_argument("name", nargs="?")
    _add_run_options(p)
    p.set_defaults(func=_cmd_presets)
    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                        format="%(asctime)s %(name)s: %(message)s")
    try:
        args.func(args)
    except (ConfigurationError, EnumerationLimitError) as exc:
        print(f"indexmod: error: {exc}", file=sys.stderr)
        return 2
    except (OSError, ValueError) as exc:
        print(f"indexmod: error: {exc}", file=sys.stderr)
        return 1
    return 0
