"""Output files: atomic writes, density CSV, run manifests."""

from __future__ import annotations

import csv
import io
import json
import math
import os
import tempfile

import numpy as np

from .density import GridDensity, grid_axis


def atomic_write(path: str, text: str):
    """Write ``text`` to ``path`` through a temporary file and a rename."""
    d = os.path.dirname(os.path.abspath(path))
    os.makedirs(d, exist_ok=True)
    fd, tmp = tempfile.mkstemp(dir=d, prefix=".tmp-", suffix=os.path.basename(path))
    try:
        with os.fdopen(fd, "w", newline="") as fh:
            fh.write(text)
        os.replace(tmp, path)
    except BaseException:
        if os.path.exists(tmp):
            os.unlink(tmp)
        raise


def _jsonable(x):
    if isinstance(x, dict):
        return {str(k): _jsonable(v) for k, v in x.items()}
    if isinstance(x, (list, tuple)):
        return [_jsonable(v) for v in x]
    if isinstance(x, np.ndarray):
        return _jsonable(x.tolist())
    if isinstance(x, (np.bool_,)):
        return bool(x)
    if isinstance(x, np.integer):
        return int(x)
    if isinstance(x, (np.floating, float)):
        x = float(x)
        return x if math.isfinite(x) else str(x)
    if isinstance(x, complex):
        return [x.real, x.imag]
    return x


def dumps(obj) -> str:
    return json.dumps(_jsonable(obj), indent=2, sort_keys=False) + "\n"


def density_to_csv(d: GridDensity) -> str:
    x = d.axis
    buf = io.StringIO()
    buf.write("re,im,density\n")
    for i in range(d.grid_n):
        xi = "%.17g" % x[i]
        for j in range(d.grid_n):
            buf.write(f"{xi},{x[j]:.17g},{d.values[i, j]:.17g}\n")
    return buf.getvalue()


def density_from_csv(text: str) -> GridDensity:
    rows = list(csv.reader(io.StringIO(text)))
    if rows[0] != ["re", "im", "density"]:
        raise ValueError("not a density CSV")
    data = np.array(rows[1:], dtype=float)
    n = math.isqrt(len(data))
    if n * n != len(data):
        raise ValueError("density CSV is not a square grid")
    extent = -data[0, 0]
    d = GridDensity(data[:, 2].reshape(n, n), extent)
    if not np.allclose(grid_axis(n, extent), data[::n, 0], rtol=1e-13, atol=1e-300):
        raise ValueError("grid axis does not match the canonical layout")
    return d


def write_density_csv(path: str, d: GridDensity):
    atomic_write(path, density_to_csv(d))


def read_density_csv(path: str) -> GridDensity:
    with open(path, newline="") as fh:
        return density_from_csv(fh.read())


def manifest_path(out: str) -> str:
    return out + ".manifest.json"
