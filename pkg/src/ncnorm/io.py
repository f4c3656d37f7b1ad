"""Matrix files and number formatting.

A matrix file is JSON of the form ``{"dims": [n, m], "entries": [[re, im], ...]}``
with the ``(nm)^2`` entries in row-major order.
"""

from __future__ import annotations

import json
import math
from pathlib import Path
from typing import Union

import numpy as np

from .errors import NCNormError
from .linalg import BipartiteOperator

PathLike = Union[str, Path]

SIG_DIGITS = 12


class MatrixFileError(NCNormError, ValueError):
    """Raised for malformed matrix files."""


def fmt(x: float) -> str:
    """A real with 12 significant digits, independent of locale."""
    x = float(x)
    if math.isnan(x):
        return "nan"
    if math.isinf(x):
        return "inf" if x > 0 else "-inf"
    return f"{x:.{SIG_DIGITS}g}"


def to_dict(Y: BipartiteOperator) -> dict:
    flat = Y.matrix.reshape(-1)
    # float() keeps the shortest repr, which round-trips bit-exactly through json
    return {"dims": [Y.n, Y.m], "entries": [[float(z.real), float(z.imag)] for z in flat]}


def from_dict(data) -> BipartiteOperator:
    if not isinstance(data, dict) or "dims" not in data or "entries" not in data:
        raise MatrixFileError("matrix file needs 'dims' and 'entries'")
    dims = data["dims"]
    if (
        not isinstance(dims, list)
        or len(dims) != 2
        or not all(isinstance(d, int) and not isinstance(d, bool) and d >= 1 for d in dims)
    ):
        raise MatrixFileError(f"dims must be two positive integers, got {dims!r}")
    n, m = dims
    d = n * m
    try:
        arr = np.asarray(data["entries"], dtype=float)
    except (TypeError, ValueError) as exc:
        raise MatrixFileError(f"entries must be [re, im] pairs: {exc}") from None
    if arr.shape != (d * d, 2):
        raise MatrixFileError(f"expected {d * d} [re, im] pairs, got array of shape {arr.shape}")
    if not np.all(np.isfinite(arr)):
        raise MatrixFileError("entries must be finite")
    M = (arr[:, 0] + 1j * arr[:, 1]).reshape(d, d)
    return BipartiteOperator(n, m, M)


def read_matrix(path: PathLike) -> BipartiteOperator:
    try:
        text = Path(path).read_text()
    except OSError as exc:
        raise MatrixFileError(f"cannot read {path}: {exc.strerror}") from None
    try:
        data = json.loads(text)
    except json.JSONDecodeError as exc:
        raise MatrixFileError(f"{path}: invalid JSON ({exc.msg})") from None
    return from_dict(data)


def write_matrix(Y: BipartiteOperator, path: PathLike) -> None:
    Path(path).write_text(json.dumps(to_dict(Y)) + "\n")
