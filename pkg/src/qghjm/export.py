"""CSV / JSON / gnuplot emitters. Floats are written with 17 significant digits."""

from __future__ import annotations

import csv
import enum
import json
import math
from pathlib import Path
from typing import Mapping, Sequence

import numpy as np

FLOAT_FMT = "%.17g"


def fmt(x) -> str:
    return FLOAT_FMT % float(x)


def write_csv(path, header: Sequence[str], columns: Sequence[Sequence[float]]) -> Path:
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    rows = zip(*columns)
    with path.open("w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(header)
        for row in rows:
            w.writerow([fmt(v) for v in row])
    return path


def read_csv(path) -> dict[str, np.ndarray]:
    with Path(path).open(newline="") as fh:
        reader = csv.reader(fh)
        header = next(reader)
        data = [[float(v) for v in row] for row in reader]
    arr = np.array(data, dtype=float).reshape(-1, len(header))
    return {name: arr[:, i] for i, name in enumerate(header)}


def _jsonable(obj):
    if isinstance(obj, enum.Enum):
        return obj.value
    if isinstance(obj, Mapping):
        return {str(k): _jsonable(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_jsonable(v) for v in obj]
    if isinstance(obj, np.ndarray):
        return [_jsonable(v) for v in obj.tolist()]
    if isinstance(obj, (np.bool_, bool)):
        return bool(obj)
    if isinstance(obj, (np.integer, int)):
        return int(obj)
    if isinstance(obj, (np.floating, float)):
        x = float(obj)
        if math.isnan(x):
            return "nan"
        if math.isinf(x):
            return "inf" if x > 0 else "-inf"
        return x
    return obj


def write_json(path, obj) -> Path:
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    path.write_text(json.dumps(_jsonable(obj), indent=2, sort_keys=True) + "\n")
    return path


def write_trajectory_csv(path, traj) -> Path:
    return write_csv(path, ("t", "r", "y"), (traj.times, traj.r, traj.y))


def write_v_profiles_csv(path, profiles) -> Path:
    """Long format ``beta,x,v`` over all profiles."""
    b_col, x_col, v_col = [], [], []
    for beta, prof in profiles.items():
        b_col.extend([beta] * prof.xs.size)
        x_col.extend(prof.xs)
        v_col.extend(prof.vs)
    return write_csv(path, ("beta", "x", "v"), (b_col, x_col, v_col))


def write_v_profiles_gnuplot(path, csv_name: str, profiles) -> Path:
    path = Path(path)
    lines = [
        "set datafile separator ','",
        "set key top left",
        "set xlabel 'x'",
        "set ylabel 'v(x)'",
    ]
    plots = [f"'{csv_name}' using 2:($1=={fmt(b)} ? $3 : 1/0) every ::1 with lines "
             f"title 'beta={b:.6g}'" for b in profiles]
    lines.append("plot " + ", \\\n     ".join(plots))
    path.write_text("\n".join(lines) + "\n")
    return path
