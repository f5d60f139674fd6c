"""CSV and JSON writers with a fixed float format, and matrix (de)serialization."""

from __future__ import annotations

import csv
import json
from pathlib import Path

import numpy as np

from .errors import ConfigError
from .matrices import TridiagMatrix


def fmt(x) -> str:
    """17 significant digits, enough to round-trip a double."""
    if isinstance(x, (bool, np.bool_)):
        return "true" if x else "false"
    if isinstance(x, (int, np.integer)):
        return str(int(x))
    if isinstance(x, (float, np.floating)):
        return "%.17g" % x
    return str(x)


def write_csv(path, header, rows) -> int:
    """Write rows under a header with LF endings; returns the row count."""
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    count = 0
    with path.open("w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(header)
        for row in rows:
            w.writerow([fmt(v) for v in row])
            count += 1
    return count


def _plain(obj):
    # json floats use repr, which already round-trips; only numpy types need converting
    if isinstance(obj, dict):
        return {k: _plain(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_plain(v) for v in obj]
    if isinstance(obj, np.generic):
        return obj.item()
    if isinstance(obj, np.ndarray):
        return _plain(obj.tolist())
    return obj


def write_json(path, obj) -> None:
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    with path.open("w", newline="\n") as fh:
        json.dump(_plain(obj), fh, indent=2, sort_keys=True, allow_nan=False)
        fh.write("\n")


def _pairs(z) -> list[list[float]]:
    return [[float(v.real), float(v.imag)] for v in np.asarray(z, dtype=complex)]


def matrix_to_json(m: TridiagMatrix) -> dict:
    return {"n": m.n, "diag": _pairs(m.diag), "sub": _pairs(m.sub), "sup": _pairs(m.sup)}


def matrix_from_json(obj: dict) -> TridiagMatrix:
    try:
        bands = {key: np.array([complex(re, im) for re, im in obj[key]], dtype=complex) for key in ("diag", "sub", "sup")}
        n = int(obj["n"])
    except (KeyError, TypeError, ValueError) as exc:
        raise ConfigError(f"malformed matrix JSON: {exc}") from exc
    m = TridiagMatrix(bands["diag"], bands["sub"], bands["sup"])
    if m.n != n:
        raise ConfigError(f"declared n={n} but diag has {m.n} entries")
    return m


def matrix_rows(m) -> list[tuple[int, int, float, float]]:
    """Dense (row, col, re, im) rows in row-major order."""
    a = m.to_dense() if isinstance(m, TridiagMatrix) else np.asarray(m, dtype=complex)
    return [(i, j, float(a[i, j].real), float(a[i, j].imag)) for i in range(a.shape[0]) for j in range(a.shape[1])]
