"""JSON matrix format shared by every file the package reads or writes.

A matrix is ``{"rows": r, "cols": c, "re": [[...]], "im": [[...]]}``; the
``"im"`` member is optional and omitted on output when all imaginary parts
vanish.  Python's float ``repr`` is the shortest string that round-trips,
so encoding is lossless for doubles.
"""

from __future__ import annotations

import json

import numpy as np

from .exceptions import InvalidInput, ShapeError
from .linalg import as_matrix


def matrix_to_dict(M):
    arr = as_matrix(M)
    out = {
        "rows": int(arr.shape[0]),
        "cols": int(arr.shape[1]),
        "re": [[float(x) for x in row] for row in arr.real],
    }
    if np.any(arr.imag != 0):
        out["im"] = [[float(x) for x in row] for row in arr.imag]
    return out


def _grid(values, rows, cols, key):
    if not isinstance(values, list) or len(values) != rows:
        raise ShapeError(f'"{key}" must be a list of {rows} rows')
    for row in values:
        if not isinstance(row, list) or len(row) != cols:
            raise ShapeError(f'every row of "{key}" must have {cols} entries')
    try:
        arr = np.array(values, dtype=float).reshape(rows, cols)
    except (TypeError, ValueError) as exc:
        raise InvalidInput(f'"{key}": {exc}') from None
    return arr


def matrix_from_dict(d):
    """Parse the JSON matrix format.

    A bare nested list is also accepted as a real matrix, which keeps
    hand-written input files short.
    """
    if isinstance(d, list):
        return as_matrix(d)
    if not isinstance(d, dict):
        raise InvalidInput("matrix must be a JSON object or nested list")
    try:
        rows, cols = int(d["rows"]), int(d["cols"])
        re = d["re"]
    except KeyError as exc:
        raise InvalidInput(f"matrix is missing key {exc}") from None
    if rows < 0 or cols < 0:
        raise ShapeError("rows and cols must be non-negative")
    real = _grid(re, rows, cols, "re")
    imag = _grid(d["im"], rows, cols, "im") if d.get("im") is not None else 0.0
    return as_matrix(real + 1j * imag)


def dumps(obj):
    return json.dumps(obj, indent=2, sort_keys=True)
