"""Headered binary matrix files.

Layout (all little-endian)::

    8 bytes   magic b"SSWMATRX"
    uint64    format version (1)
    uint64    rows n
    uint64    cols d
    n*d f64   row-major values
"""

from __future__ import annotations

import struct
from pathlib import Path

import numpy as np

from .errors import MalformedHeader, TruncatedData
from .report import write_csv

MAGIC = b"SSWMATRX"
VERSION = 1
_HEADER = struct.Struct("<8sQQQ")


def write_matrix(mat: np.ndarray, path) -> None:
    mat = np.atleast_2d(np.asarray(mat, dtype="<f8"))
    n, d = mat.shape
    Path(path).write_bytes(_HEADER.pack(MAGIC, VERSION, n, d) + np.ascontiguousarray(mat).tobytes())


def read_matrix(path) -> np.ndarray:
    raw = Path(path).read_bytes()
    if len(raw) < _HEADER.size:
        raise MalformedHeader(f"{path}: file shorter than the matrix header")
    magic, version, n, d = _HEADER.unpack_from(raw)
    if magic != MAGIC:
        raise MalformedHeader(f"{path}: bad magic {magic!r}")
    if version != VERSION:
        raise MalformedHeader(f"{path}: unsupported matrix format version {version}")
    body = raw[_HEADER.size:]
    if len(body) != 8 * n * d:
        raise TruncatedData(f"{path}: expected {8 * n * d} data bytes, found {len(body)}")
    return np.frombuffer(body, dtype="<f8").reshape(n, d).astype(float)


def write_matrix_csv(mat: np.ndarray, path) -> None:
    mat = np.atleast_2d(np.asarray(mat, dtype=float))
    write_csv(path, [f"c{j}" for j in range(mat.shape[1])], (list(row) for row in mat))


def write_vector(vec: np.ndarray, path) -> None:
    """Store a vector as a 1 x d matrix."""
    write_matrix(np.asarray(vec, dtype=float).reshape(1, -1), path)


def read_vector(path) -> np.ndarray:
    return read_matrix(path).ravel()


def write_bits(bits: np.ndarray, path) -> None:
    """Store a bitstream as an n x 1 matrix."""
    write_matrix(np.asarray(bits, dtype=float).reshape(-1, 1), path)


def read_bits(path) -> np.ndarray:
    vals = read_matrix(path).ravel()
    if not np.all((vals == 0) | (vals == 1)):
        raise MalformedHeader(f"{path}: bit file contains values other than 0 and 1")
    return vals.astype(np.int8)
