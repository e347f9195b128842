"""CSV and JSON writers with fixed, locale-independent number formatting.

Floats are written with 17 significant digits (``%.17g``) so repeated runs
produce byte-identical files and every double round-trips exactly.
Non-finite floats become ``null`` in JSON and ``nan``/``inf`` in CSV.
"""

from __future__ import annotations

import json
import math
from pathlib import Path
from typing import Iterable, Sequence

import numpy as np


def fmt_float(x: float) -> str:
    return "%.17g" % x


def _cell(value) -> str:
    if value is None:
        return ""
    if isinstance(value, (bool, np.bool_)):
        return "true" if value else "false"
    if isinstance(value, (int, np.integer)):
        return str(int(value))
    if isinstance(value, (float, np.floating)):
        return fmt_float(float(value))
    return str(value)


def write_csv(path: str | Path, header: Sequence[str], rows: Iterable[Sequence]) -> Path:
    path = Path(path)
    lines = [",".join(header)]
    lines += [",".join(_cell(v) for v in row) for row in rows]
    with open(path, "w", newline="\n") as fh:
        fh.write("\n".join(lines) + "\n")
    return path


def _encode(obj, indent: int, level: int) -> str:
    pad = " " * (indent * (level + 1))
    end = " " * (indent * level)
    if obj is None:
        return "null"
    if isinstance(obj, (bool, np.bool_)):
        return "true" if obj else "false"
    if isinstance(obj, (int, np.integer)):
        return str(int(obj))
    if isinstance(obj, (float, np.floating)):
        return fmt_float(float(obj)) if math.isfinite(obj) else "null"
    if isinstance(obj, str):
        return json.dumps(obj)
    if isinstance(obj, dict):
        if not obj:
            return "{}"
        items = [f"{pad}{json.dumps(str(k))}: {_encode(v, indent, level + 1)}" for k, v in obj.items()]
        return "{\n" + ",\n".join(items) + "\n" + end + "}"
    if isinstance(obj, (list, tuple, np.ndarray)):
        if len(obj) == 0:
            return "[]"
        items = [pad + _encode(v, indent, level + 1) for v in obj]
        return "[\n" + ",\n".join(items) + "\n" + end + "]"
    raise TypeError(f"cannot encode {type(obj).__name__} as JSON")


def dumps(obj, indent: int = 2) -> str:
    return _encode(obj, indent, 0) + "\n"


def write_json(path: str | Path, obj) -> Path:
    path = Path(path)
    with open(path, "w", newline="\n") as fh:
        fh.write(dumps(obj))
    return path


def path_rows(path, k: int | None = None):
    """Rows ``t,w,b,u,y,s`` for one market path (prefixed by ``k`` if given)."""
    prefix = [] if k is None else [k]
    for i, t in enumerate(path.grid.times):
        yield prefix + [t, path.w[i], path.b[i], path.u[i], path.y[i], path.s[i]]


def filter_rows(filt, k: int | None = None):
    prefix = [] if k is None else [k]
    for i, t in enumerate(filt.grid.times):
        yield prefix + [t, filt.gamma_vals[i], filt.b0[i], filt.upsilon0[i], filt.mu0[i]]


def wealth_rows(wealth, k: int | None = None):
    prefix = [] if k is None else [k]
    for i, t in enumerate(wealth.grid.times):
        yield prefix + [t, wealth.pi[i], wealth.v[i], wealth.v_tilde[i]]


PATH_HEADER = ("t", "w", "b", "u", "y", "s")
FILTER_HEADER = ("t", "gamma", "b0", "upsilon0", "mu0")
WEALTH_HEADER = ("t", "pi", "v", "v_tilde")
