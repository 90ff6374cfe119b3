"""Plain-text serialisation: key-value report blocks, CSV tables and snapshot files."""

from __future__ import annotations

import csv
import dataclasses
import math
import re
from pathlib import Path

import numpy as np

from ecoepi.errors import ValidationError

CSV_DIGITS = 10


def _kv_value(x) -> str:
    if isinstance(x, (bool, np.bool_)):
        return "true" if x else "false"
    if x is None:
        return "none"
    if isinstance(x, (float, np.floating)):
        return "%.17g" % float(x)
    if isinstance(x, (int, np.integer)):
        return str(int(x))
    return str(x)


def flatten(obj, prefix: str = "") -> dict[str, object]:
    """Dataclasses, dicts and tuples flattened to dotted scalar keys."""
    if dataclasses.is_dataclass(obj) and not isinstance(obj, type):
        obj = {f.name: getattr(obj, f.name) for f in dataclasses.fields(obj)}
    if isinstance(obj, dict):
        out = {}
        for k, v in obj.items():
            out.update(flatten(v, f"{prefix}{k}."))
        return out
    if isinstance(obj, (list, tuple)) and not isinstance(obj, str):
        out = {}
        for i, v in enumerate(obj):
            out.update(flatten(v, f"{prefix}{i}."))
        return out
    if isinstance(obj, np.ndarray):
        return flatten(obj.tolist(), prefix)
    return {prefix[:-1]: obj}


def format_kv(report) -> str:
    """One ``name = value`` line per scalar, floats with 17 significant digits."""
    items = flatten(report)
    return "".join(f"{k} = {_kv_value(v)}\n" for k, v in items.items())


def write_kv(path: Path | str, report) -> Path:
    path = Path(path)
    path.write_text(format_kv(report))
    return path


def read_kv(path: Path | str) -> dict[str, str]:
    out = {}
    for line in Path(path).read_text().splitlines():
        if line.strip():
            k, _, v = line.partition(" = ")
            out[k] = v
    return out


def _csv_cell(x) -> str:
    if isinstance(x, (float, np.floating)):
        x = float(x)
        return "nan" if math.isnan(x) else "%.*g" % (CSV_DIGITS, x)
    return _kv_value(x)


def write_csv(path: Path | str, header, rows) -> Path:
    path = Path(path)
    with path.open("w", newline="") as fh:
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow(header)
        for row in rows:
            writer.writerow([_csv_cell(x) for x in row])
    return path


def read_csv(path: Path | str) -> tuple[list[str], np.ndarray]:
    with Path(path).open() as fh:
        header = fh.readline().strip().split(",")
    return header, np.loadtxt(path, delimiter=",", skiprows=1, ndmin=2)


def snapshot_filename(run: str, field: str, t: float) -> str:
    return f"{run}_{field}_t{t:g}.csv"


def write_snapshot(directory: Path | str, run: str, t: float, fields, h: float) -> list[Path]:
    """One CSV per field with a ``# field= t= nx= ny= h=`` header line."""
    directory = Path(directory)
    paths = []
    for name, arr in fields.items():
        nx, ny = arr.shape
        path = directory / snapshot_filename(run, name, t)
        with path.open("w") as fh:
            fh.write(f"# field={name} t={t:g} nx={nx} ny={ny} h={h:g}\n")
            np.savetxt(fh, arr, fmt="%.17g", delimiter=",")
        paths.append(path)
    return paths


_HEADER = re.compile(r"#\s*field=(\w+)\s+t=(\S+)\s+nx=(\d+)\s+ny=(\d+)\s+h=(\S+)")


def read_snapshot(path: Path | str) -> tuple[dict[str, object], np.ndarray]:
    with Path(path).open() as fh:
        m = _HEADER.match(fh.readline())
        if not m:
            raise ValidationError(f"{path}: missing snapshot header")
        data = np.loadtxt(fh, delimiter=",", ndmin=2)
    meta = {"field": m[1], "t": float(m[2]), "nx": int(m[3]), "ny": int(m[4]), "h": float(m[5])}
    if data.shape != (meta["nx"], meta["ny"]):
        raise ValidationError(f"{path}: header says {meta['nx']}x{meta['ny']}, data is {data.shape}")
    return meta, data
