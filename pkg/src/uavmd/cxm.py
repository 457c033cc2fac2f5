"""File formats: CXM1 complex-matrix binary, CSV tables, 16-bit PGM images.

CXM1 layout (little-endian):
    bytes 0..3    magic "CXM1"
    bytes 4..7    u32 version = 1
    bytes 8..15   u64 rows
    bytes 16..23  u64 cols
    bytes 24..    rows*cols pairs of f64 (re, im), row-major

Format violations raise FormatError carrying the offset of the first bad
byte, which the CLI surfaces verbatim.
"""

from __future__ import annotations

import struct

import numpy as np

from .errors import FormatError

MAGIC = b"CXM1"
VERSION = 1
_HEADER = struct.Struct("<4sIQQ")


def write_cxm(path, matrix) -> None:
    """Write a complex matrix (1-D input becomes a single row)."""
    m = np.atleast_2d(np.asarray(matrix, dtype=complex))
    rows, cols = m.shape
    inter = np.empty((rows, cols, 2), dtype="<f8")
    inter[..., 0] = m.real
    inter[..., 1] = m.imag
    with open(path, "wb") as fh:
        fh.write(_HEADER.pack(MAGIC, VERSION, rows, cols))
        fh.write(inter.tobytes())


def read_cxm(path) -> np.ndarray:
    """Read a CXM1 file back into a complex 2-D array."""
    with open(path, "rb") as fh:
        raw = fh.read()
    if len(raw) < _HEADER.size:
        # header truncated: first missing byte is at the end of what we have
        raise FormatError("truncated CXM1 header", offset=len(raw))
    magic, version, rows, cols = _HEADER.unpack_from(raw, 0)
    if magic != MAGIC:
        bad = next(i for i in range(4) if raw[i] != MAGIC[i])
        raise FormatError(f"bad magic {magic!r}", offset=bad)
    if version != VERSION:
        raise FormatError(f"unsupported CXM version {version}", offset=4)
    need = _HEADER.size + rows * cols * 16
    if len(raw) < need:
        raise FormatError(
            f"payload truncated: need {need} bytes, have {len(raw)}", offset=len(raw))
    if len(raw) > need:
        raise FormatError("trailing bytes after payload", offset=need)
    flat = np.frombuffer(raw, dtype="<f8", offset=_HEADER.size,
                         count=rows * cols * 2)
    pairs = flat.reshape(rows, cols, 2)
    return pairs[..., 0] + 1j * pairs[..., 1]


# ---------------------------------------------------------------------------
# CSV / PGM exports

_DB_FLOOR = -300.0  # dB assigned to exact zeros


def _to_db(mag):
    mag = np.asarray(mag, dtype=float)
    out = np.full(mag.shape, _DB_FLOOR)
    nz = mag > 0
    out[nz] = 20.0 * np.log10(mag[nz])
    return out


def write_db_csv(path, matrix, row_axis=None, col_axis=None,
                 row_label="row", col_label="col") -> None:
    """Magnitude-in-dB CSV with optional axis header row/column.

    The first header row carries the column axis; each data line starts with
    its row-axis value.  Axes default to plain indices.
    """
    m = np.atleast_2d(np.asarray(matrix))
    db = _to_db(np.abs(m))
    rows, cols = db.shape
    row_axis = np.arange(rows) if row_axis is None else np.asarray(row_axis)
    col_axis = np.arange(cols) if col_axis is None else np.asarray(col_axis)
    with open(path, "w") as fh:
        fh.write(f"{row_label}\\{col_label}," +
                 ",".join(f"{v:.9g}" for v in col_axis) + "\n")
        for i in range(rows):
            fh.write(f"{row_axis[i]:.9g}," +
                     ",".join(f"{v:.6f}" for v in db[i]) + "\n")


def write_pgm(path, matrix, floor_db=None, ceiling_db=None) -> None:
    """16-bit binary PGM of the magnitude in dB, row = first matrix axis.

    Values are mapped linearly from [floor, ceiling] dB onto 0..65535; the
    mapping endpoints are recorded in a header comment.  Defaults: ceiling =
    max dB, floor = ceiling − 80.
    """
    m = np.atleast_2d(np.asarray(matrix))
    db = _to_db(np.abs(m))
    if ceiling_db is None:
        ceiling_db = float(db.max()) if db.size else 0.0
    if floor_db is None:
        floor_db = ceiling_db - 80.0
    if ceiling_db <= floor_db:
        ceiling_db = floor_db + 1.0
    scaled = np.clip((db - floor_db) / (ceiling_db - floor_db), 0.0, 1.0)
    img = np.round(scaled * 65535.0).astype(">u2")   # PGM payload is big-endian
    rows, cols = img.shape
    with open(path, "wb") as fh:
        fh.write(b"P5\n")
        fh.write(f"# dB floor={floor_db:.3f} ceiling={ceiling_db:.3f}\n".encode())
        fh.write(f"{cols} {rows}\n65535\n".encode())
        fh.write(img.tobytes())
