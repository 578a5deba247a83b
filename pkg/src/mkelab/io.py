"""Number formatting and record serialization."""

import csv
import json
import math
from pathlib import Path

import numpy as np


def format_float(x) -> str:
    """Shortest round-trip text for ``x``; integral values drop the ``.0``."""
    x = float(x)
    if x == 0.0:
        return "0"
    if math.isfinite(x) and x.is_integer() and abs(x) < 1e16:
        return str(int(x))
    return repr(x)


def to_jsonable(obj):
    if isinstance(obj, dict):
        return {str(k): to_jsonable(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [to_jsonable(v) for v in obj]
    if isinstance(obj, np.ndarray):
        return to_jsonable(obj.tolist())
    if isinstance(obj, (np.floating, float)):
        v = float(obj)
        return v if math.isfinite(v) else repr(v)
    if isinstance(obj, np.integer):
        return int(obj)
    if isinstance(obj, np.bool_):
        return bool(obj)
    return obj


def dump_json(obj, path) -> None:
    Path(path).write_text(
        json.dumps(to_jsonable(obj), indent=2, sort_keys=True) + "\n", encoding="utf-8"
    )


def write_csv(path, header, rows) -> None:
    with Path(path).open("w", newline="", encoding="utf-8") as fh:
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow(header)
        for row in rows:
            writer.writerow(
                ["" if v is None else v if isinstance(v, str) else format_float(v) for v in row]
            )


def write_vector_csv(path, vec) -> None:
    """Checkpoint a flat parameter vector, one value per line under ``param``."""
    write_csv(path, ["param"], [[v] for v in np.asarray(vec, dtype=float).ravel()])


def read_vector_csv(path) -> np.ndarray:
    with Path(path).open(newline="", encoding="utf-8") as fh:
        rows = list(csv.reader(fh))
    if not rows or rows[0] != ["param"]:
        raise ValueError(f"{path}: expected header 'param'")
    return np.array([float(r[0]) for r in rows[1:] if r])
