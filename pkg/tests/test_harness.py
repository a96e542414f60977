import dataclasses
import json

import numpy as np
import pytest

from indexmod.errors import ConfigurationError
from indexmod.harness import (
    HEADER,
    Experiment,
    emit_results,
    experiment_from_kv,
    format_csv,
    load_experiment,
    parse_grid,
    parse_kv,
    parse_results,
    read_results,
    run_ber_point,
    run_nr_sweep,
    run_sweep,
)
from indexmod.harness.cli import main, preset_files, preset_names
from indexmod.loadmod import LmConfig
from indexmod.schemes import SchemeConfig

SMALL = SchemeConfig("ti-sm-mbm", N=4, K=2, L=2, n_t=2, m_rf=1, mod_order=4, n_r=2)


def small_exp(**kw):
    base = dict(scheme=SMALL, detector="ml", snr_grid_db=(0.0, 4.0), min_errors=50, max_frames=640, master_seed=5)
    base.update(kw)
    return Experiment(**base)


def test_parse_grid():
    assert parse_grid("0:10:2") == (0, 2, 4, 6, 8, 10)
    assert parse_grid("4:24", integer=True) == tuple(range(4, 25))
    assert parse_grid("1.5, 3") == (1.5, 3.0)
    assert parse_grid("0:1:0.1")[-1] == 1.0
    assert parse_grid("") == ()
    with pytest.raises(ConfigurationError):
        parse_grid("0:10:-1")


def test_parse_kv():
    kv = parse_kv("# comment\nscheme = ti-sm  # trailing\n\nN=4\n")
    assert kv == {"scheme": "ti-sm", "N": "4"}
    with pytest.raises(ConfigurationError, match="line 1"):
        parse_kv("scheme ti-sm")


def test_experiment_from_kv():
    exp = experiment_from_kv(parse_kv(
        "scheme = ti-sm\nN = 4\nK = 2\nn_t = 4\nmod_order = 32\nL = 2\nn_r = 8\ndetector = ml\n"
        "snr = 0:4:2\nseed = 9\nmin_errors = 10\nmax_frames = 100\ntaps = 1001,1010,0101,1100\n"))
    assert exp.snr_grid_db == (0, 2, 4) and exp.master_seed == 9
    assert exp.scheme.tap_codebook.patterns.astype(int).tolist()[2] == [0, 1, 0, 1]
    with pytest.raises(ConfigurationError):
        experiment_from_kv({"scheme": "ti-sm", "N": "4"})
    with pytest.raises(ConfigurationError):
        experiment_from_kv({"scheme": "ti-sm", "N": "x", "K": "2"})
    with pytest.raises(ConfigurationError):
        experiment_from_kv({"scheme": "ti-sm", "N": "4", "K": "2", "detector": "zf"})


def test_experiment_invariants():
    with pytest.raises(ConfigurationError):
        small_exp(min_errors=0)
    with pytest.raises(ConfigurationError):
        Experiment(scheme=LmConfig("smp-bpsk", 2), detector="alg1-sp")


def test_incompatible_detector_before_any_trial():
    big = SchemeConfig("ti-sm-mbm", N=16, K=6, L=4, n_t=8, m_rf=4, mod_order=4, n_r=8)
    with pytest.raises(Exception, match="alg1"):
        run_ber_point(small_exp(scheme=big), 0.0)


@pytest.mark.parametrize("detector", ["ml", "alg1-omp", "alg1-cosamp", "alg1-sp"])
def test_noiseless_override_gives_zero_ber(detector):
    if detector == "ml":
        cfg = SchemeConfig("ti-sm-mbm", N=4, K=2, L=2, n_t=4, m_rf=3, mod_order=4, n_r=8)
    else:
        cfg = SchemeConfig("ti-sm-mbm", N=16, K=6, L=4, n_t=8, m_rf=4, mod_order=4, n_r=8)
    exp = Experiment(cfg, detector, min_errors=10**9, max_frames=1000)
    rec = run_ber_point(exp, 0.0, sigma2=0.0)
    assert rec.bit_errors == 0 and rec.frames == 1000


def test_noiseless_lm():
    cfg = LmConfig("smp-bpsk", 4, n_r=4)
    rec = run_ber_point(Experiment(cfg, "ml", max_frames=1000), 0.0, sigma2=0.0)
    assert rec.bit_errors == 0 and rec.frames == 1000


def test_deterministic_and_record_invariants():
    a = run_sweep(small_exp())
    b = run_sweep(small_exp())
    strip = [dataclasses.replace(r, elapsed_seconds=0.0) for r in a]
    assert strip == [dataclasses.replace(r, elapsed_seconds=0.0) for r in b]
    for r in a:
        assert r.bits == r.frames * SMALL.signal_set.frame_bits
        assert r.ber == r.bit_errors / r.bits
        assert r.bit_errors >= 50 or r.frames == 640


def test_order_and_parallel_independence():
    exp = small_exp(snr_grid_db=(-2.0, 2.0, 6.0))
    forward = [dataclasses.replace(r, elapsed_seconds=0) for r in run_sweep(exp)]
    backward = [dataclasses.replace(run_ber_point(exp, s, point_index=i), elapsed_seconds=0)
                for i, s in reversed(list(enumerate(exp.snr_grid_db)))]
    assert forward == backward[::-1]
    par = [dataclasses.replace(run_ber_point(exp, s, point_index=i, workers=2), elapsed_seconds=0)
           for i, s in enumerate(exp.snr_grid_db)]
    assert par == forward


def test_stop_ber():
    exp = small_exp(snr_grid_db=(0.0, 30.0, 40.0), stop_ber=1e-3)
    recs = run_sweep(exp)
    assert len(recs) == 2


def test_nr_sweep():
    exp = small_exp(min_errors=100, max_frames=3200)
    recs = run_nr_sweep(exp, 6.0, [1, 2, 4])
    assert [r.n_r for r in recs] == [1, 2, 4]
    bers = [r.ber for r in recs]
    assert bers[0] > bers[1] > bers[2]
    assert run_nr_sweep(exp, 6.0, []) == []


def test_csv_emission_round_trip(tmp_path):
    recs = run_sweep(small_exp())
    text = format_csv(recs)
    lines = text.splitlines()
    assert lines[0] == ",".join(HEADER) and len(lines) == 1 + len(recs)
    assert parse_results(text) == recs
    assert format_csv(parse_results(text)) == text  # byte-stable
    one = format_csv(recs[:1]).splitlines()
    assert len(one) == 2
    for r in parse_results(text):
        assert abs(r.ber - r.bit_errors / r.bits) <= 1e-12 * max(r.ber, 1e-300)
    out = tmp_path / "r.csv"
    emit_results(recs, out, json_mirror=True)
    assert read_results(out) == recs
    assert json.loads(out.with_suffix(".json").read_text())[0]["scheme"] == recs[0].scheme


def test_emit_reports_path_on_failure(tmp_path):
    bad = tmp_path / "missing" / "r.csv"
    with pytest.raises(OSError, match="missing"):
        emit_results([], bad)


# --- presets and CLI ------------------------------------------------------------

def test_presets_present():
    assert preset_names() == ["fig2", "fig3", "fig4", "fig5", "fig7", "fig8"]
    for name in preset_names():
        for path in preset_files(name):
            exp = load_experiment(path)
            assert exp.snr_grid_db


def test_cli_rate(capsys):
    assert main(["rate", str(preset_files("fig2")[0])]) == 0
    assert "3.2 bpcu (16/5)" in capsys.readouterr().out


def test_cli_simulate_and_sweep(tmp_path, capsys):
    cfg = tmp_path / "small.cfg"
    cfg.write_text("scheme = ti-sm-mbm\nN = 4\nK = 2\nL = 2\nn_t = 2\nm_rf = 1\nmod_order = 4\nn_r = 2\n"
                   "min_errors = 20\nmax_frames = 128\n")
    out = tmp_path / "r.csv"
    assert main(["simulate", str(cfg), "--snr", "0:4:2", "--seed", "3", "--out", str(out)]) == 0
    recs = read_results(out)
    assert [r.snr_db for r in recs] == [0.0, 2.0, 4.0] and all(r.seed == 3 for r in recs)
    first = out.read_bytes()
    assert main(["simulate", str(cfg), "--snr", "0:4:2", "--seed", "3", "--out", str(out)]) == 0
    assert read_results(out) == [dataclasses.replace(r, elapsed_seconds=r2.elapsed_seconds)
                                 for r, r2 in zip(recs, read_results(out))]
    assert len(first) > 0
    assert main(["sweep-nr", str(cfg), "--snr", "4", "--nr", "1:3"]) == 0
    text = capsys.readouterr().out
    assert [r.n_r for r in parse_results(text)] == [1, 2, 3]


def test_cli_alphabet_and_paspr(tmp_path, capsys):
    out = tmp_path / "alpha.txt"
    assert main(["lm-alphabet", "--nt", "4", "--nm", "8", "--seed", "1", "--samples-per-point", "30",
                 "--out", str(out)]) == 0
    assert main(["paspr", str(out)]) == 0
    assert abs(float(capsys.readouterr().out.strip().splitlines()[-1]) - 1.0) < 1e-12


def test_cli_configuration_errors(tmp_path, capsys):
    bad = tmp_path / "bad.cfg"
    bad.write_text("scheme = ti-sm\nN = 4\nK = 2\nm_rf = 2\n")
    assert main(["rate", str(bad)]) != 0
    err = capsys.readouterr().err.strip()
    assert err.count("\n") == 0 and "error" in err
    assert main(["rate", str(tmp_path / "nope.cfg")]) != 0
    assert main(["presets", "run", "fig99"]) != 0
    assert main(["paspr", str(tmp_path / "nope.txt")]) != 0


def test_cli_presets_list(capsys):
    assert main(["presets", "list"]) == 0
    assert "fig8: conventional-lm ti-lm" in capsys.readouterr().out


def test_cli_presets_run_small(tmp_path):
    out = tmp_path / "fig8.csv"
    assert main(["presets", "run", "fig8", "--snr", "0", "--max-frames", "64", "--out", str(out)]) == 0
    recs = read_results(out)
    assert len(recs) == 2 and all(r.frames <= 64 for r in recs)
