"""Plain-text tensor files, ASCII PGM maps and CSV reports."""

from __future__ import annotations

import csv
import math
from dataclasses import astuple, fields
from pathlib import Path

import numpy as np

from .diagnostics.maps import DiagnosticMap
from .tensor import GridShape


class TensorFormatError(ValueError):
    pass


class MalformedHeaderError(TensorFormatError):
    pass


class CountMismatchError(TensorFormatError):
    pass


class NonNumericTokenError(TensorFormatError):
    pass


def format_tensor(t) -> str:
    t = np.asarray(t, dtype=np.float64)
    shape = t.shape or (1,)
    body = " ".join(format(float(v), ".17g") for v in t.ravel())
    return f"shape {' '.join(str(s) for s in shape)}\n{body}\n"


def parse_tensor(text: str) -> np.ndarray:
    header, _, body = text.partition("\n")
    parts = header.split()
    if not parts or parts[0] != "shape" or len(parts) < 2:
        raise MalformedHeaderError(f"expected 'shape d0 d1 ...', got {header!r}")
    try:
        shape = tuple(int(p) for p in parts[1:])
    except ValueError:
        raise MalformedHeaderError(f"non-integer extent in {header!r}") from None
    if any(s < 1 for s in shape):
        raise MalformedHeaderError(f"extents must be positive: {shape}")
    tokens = body.split()
    want = math.prod(shape)
    if len(tokens) != want:
        raise CountMismatchError(f"shape {shape} needs {want} values, found {len(tokens)}")
    values = []
    for tok in tokens:
        try:
            v = float(tok)
        except ValueError:
            raise NonNumericTokenError(f"not a number: {tok!r}") from None
        if not math.isfinite(v):
            raise NonNumericTokenError(f"non-finite value: {tok!r}")
        values.append(v)
    return np.array(values, dtype=np.float64).reshape(shape)


def write_tensor(t, path) -> None:
    Path(path).write_text(format_tensor(t))


def read_tensor(path) -> np.ndarray:
    return parse_tensor(Path(path).read_text())


def quantize(v: float) -> int:
    """``round(255 * v)`` with halves rounded up, clamped to [0, 255]."""
    return min(255, max(0, math.floor(255.0 * float(v) + 0.5)))


def format_pgm(m: DiagnosticMap) -> str:
    g = m.grid
    rows = []
    for r in range(g.height):
        rows.append(" ".join(str(quantize(v)) for v in m.values[r * g.width:(r + 1) * g.width]))
    return f"P2\n{g.width} {g.height}\n255\n" + "\n".join(rows) + "\n"


def emit_pgm(m: DiagnosticMap, path) -> None:
    Path(path).write_text(format_pgm(m))


def parse_pgm(text: str) -> DiagnosticMap:
    tokens = text.split()
    if not tokens or tokens[0] != "P2":
        raise TensorFormatError("not an ASCII PGM (P2) file")
    w, h, maxval = (int(t) for t in tokens[1:4])
    vals = np.array([int(t) for t in tokens[4:]], dtype=np.float64) / maxval
    if vals.size != w * h:
        raise CountMismatchError(f"{w}x{h} image has {vals.size} pixels")
    return DiagnosticMap(GridShape(h, w), vals, "minmax")


def write_csv(rows, path, columns=None) -> None:
    """Write dataclass rows (or plain tuples with explicit ``columns``)."""
    rows = list(rows)
    if columns is None and rows:
        columns = [f.name for f in fields(rows[0])]
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(columns)
        for row in rows:
            w.writerow(_csv_cell(v) for v in (astuple(row) if hasattr(row, "__dataclass_fields__") else row))


def _csv_cell(v):
    if isinstance(v, bool):
        return "true" if v else "false"
    if isinstance(v, float):
        return format(v, ".17g")
    return v
