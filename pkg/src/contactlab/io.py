"""Deterministic CSV/JSON writers; every file starts with the config that produced it."""

from __future__ import annotations

import csv
import json
import os
from pathlib import Path

ENV_OUTPUT_DIR = "CONTACTLAB_OUTPUT_DIR"


def output_dir(explicit: str | os.PathLike | None = None) -> Path:
    """``explicit`` if given, else $CONTACTLAB_OUTPUT_DIR, else ./contactlab-out; created on demand."""
    path = Path(explicit or os.environ.get(ENV_OUTPUT_DIR) or "contactlab-out")
    path.mkdir(parents=True, exist_ok=True)
    return path


def config_line(config: dict) -> str:
    return json.dumps(config, sort_keys=True, separators=(",", ":"))


def fmt(x) -> str:
    if isinstance(x, str):
        return x
    if isinstance(x, (bool, int)) and not isinstance(x, float):
        return str(x)
    return f"{float(x):.15g}"


def write_csv(path, columns, rows, config: dict) -> Path:
    path = Path(path)
    with path.open("w", newline="") as fh:
        fh.write(f"# config: {config_line(config)}\n")
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(columns)
        for row in rows:
            w.writerow([fmt(v) for v in row])
    return path


def read_csv(path):
    """(config, columns, rows-as-strings) of a file written by write_csv."""
    with Path(path).open() as fh:
        first = fh.readline()
        if not first.startswith("# config: "):
            raise ValueError(f"{path} has no config header")
        config = json.loads(first[len("# config: "):])
        reader = csv.reader(fh)
        columns = next(reader)
        return config, columns, list(reader)


def write_json(path, payload: dict, config: dict) -> Path:
    path = Path(path)
    doc = {"schema": 1, "config": config, **payload}
    path.write_text(json.dumps(doc, sort_keys=True, indent=2) + "\n")
    return path


def write_text(path, text: str, config: dict) -> Path:
    path = Path(path)
    path.write_text(f"# config: {config_line(config)}\n{text}")
    return path
