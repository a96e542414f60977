"""CSV (and optional JSON) emission of BER records."""

from __future__ import annotations

import csv
import io
import json
import sys
from dataclasses import asdict, fields
from pathlib import Path

from .engine import BerRecord

HEADER = ("scheme", "detector", "snr_db", "n_r", "frames", "bits", "bit_errors", "ber", "seed", "elapsed_seconds")
_INT_FIELDS = {"n_r", "frames", "bits", "bit_errors", "seed"}
_FLOAT_FIELDS = {"snr_db", "ber", "elapsed_seconds"}


def format_csv(records) -> str:
    """CSV text for ``records``; floats use ``repr`` so output is byte-stable and lossless."""
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(HEADER)
    for rec in records:
        writer.writerow([repr(v) if isinstance(v, float) else v for v in (getattr(rec, f) for f in HEADER)])
    return buf.getvalue()


def emit_results(records, destination=None, json_mirror: bool = False) -> None:
    """Write records as CSV to ``destination`` (a path, or stdout when None).

    With ``json_mirror`` a ``.json`` file with the same rows is written next to
    the CSV. I/O failures are re-raised as ``OSError`` naming the path.
    """
    records = list(records)
    text = format_csv(records)
    if destination is None:
        sys.stdout.write(text)
        return
    path = Path(destination)
    try:
        path.write_text(text)
        if json_mirror:
            rows = [asdict(r) for r in records]
            path.with_suffix(".json").write_text(json.dumps(rows, indent=1) + "\n")
    except OSError as exc:
        raise OSError(f"cannot write results to {path}: {exc.strerror or exc}") from exc


def parse_results(text: str) -> list[BerRecord]:
    reader = csv.DictReader(io.StringIO(text))
    if tuple(reader.fieldnames or ()) != HEADER:
        raise ValueError(f"unexpected CSV header {reader.fieldnames}")
    out = []
    for row in reader:
        kw = {}
        for f in fields(BerRecord):
            v = row[f.name]
            kw[f.name] = int(v) if f.name in _INT_FIELDS else float(v) if f.name in _FLOAT_FIELDS else v
        out.append(BerRecord(**kw))
    return out


def read_results(path) -> list[BerRecord]:
    return parse_results(Path(path).read_text())
