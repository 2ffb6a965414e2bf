"""Binary PGM I/O and the 8x8 patch pipeline.

A pixel at (r, c) lands in patch row (r // e) * cols + (c // e), column
(r % e) * e + (c % e), where e is the patch edge.
"""

from __future__ import annotations

import re
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from .errors import (IndivisibleDimensions, LayoutMismatch, MalformedHeader, TruncatedData,
                     UnsupportedMaxval)

_MEAN_GRID = 2.0 ** 32
_TOKEN = re.compile(rb"\s*(?:#[^\n]*\n\s*)*(\S+)")


@dataclass(frozen=True)
class PatchLayout:
    rows: int
    cols: int
    global_mean: float
    patch_edge: int = 8

    @property
    def n(self) -> int:
        return self.rows * self.cols

    @property
    def d(self) -> int:
        return self.patch_edge * self.patch_edge


def read_pgm(path) -> np.ndarray:
    """Read a binary (P5) 8-bit PGM into a float64 height x width array."""
    raw = Path(path).read_bytes()
    if raw[:2] != b"P5":
        raise MalformedHeader(f"{path}: expected binary PGM magic 'P5', got {raw[:2]!r}")
    pos = 2
    fields = []
    for _ in range(3):
        match = _TOKEN.match(raw, pos)
        if match is None:
            raise MalformedHeader(f"{path}: truncated header")
        try:
            fields.append(int(match.group(1)))
        except ValueError:
            raise MalformedHeader(f"{path}: non-integer header field {match.group(1)!r}") from None
        pos = match.end()
    width, height, maxval = fields
    if width <= 0 or height <= 0:
        raise MalformedHeader(f"{path}: invalid dimensions {width}x{height}")
    if not 0 < maxval <= 255:
        raise UnsupportedMaxval(f"{path}: maxval {maxval} not in 1..255")
    if pos >= len(raw) or not raw[pos:pos + 1].isspace():
        raise MalformedHeader(f"{path}: missing whitespace after maxval")
    pos += 1
    need = width * height
    data = raw[pos:pos + need]
    if len(data) < need:
        raise TruncatedData(f"{path}: expected {need} pixel bytes, found {len(data)}")
    return np.frombuffer(data, dtype=np.uint8).reshape(height, width).astype(float)


def write_pgm(img: np.ndarray, path) -> None:
    """Write an 8-bit P5 PGM, clamping to [0, 255] and rounding half to even."""
    img = np.asarray(img, dtype=float)
    pixels = np.clip(np.round(img), 0, 255).astype(np.uint8)
    height, width = pixels.shape
    Path(path).write_bytes(b"P5\n%d %d\n255\n" % (width, height) + pixels.tobytes())


def patchify(img: np.ndarray, patch_edge: int = 8):
    """Split into row-major patches, flatten each row-wise and subtract the global mean."""
    img = np.asarray(img, dtype=float)
    height, width = img.shape
    if height % patch_edge or width % patch_edge:
        raise IndivisibleDimensions(
            f"image {width}x{height} is not divisible into {patch_edge}x{patch_edge} patches")
    rows, cols = height // patch_edge, width // patch_edge
    # Snapping the mean to a multiple of 2^-32 keeps pixel - mean exact for
    # 8-bit sources, so unpatchify restores the pixels bit for bit.
    mean = float(np.round(img.mean() * _MEAN_GRID) / _MEAN_GRID)
    blocks = (img - mean).reshape(rows, patch_edge, cols, patch_edge).transpose(0, 2, 1, 3)
    layout = PatchLayout(rows=rows, cols=cols, global_mean=mean, patch_edge=patch_edge)
    return blocks.reshape(rows * cols, patch_edge * patch_edge), layout


def unpatchify(mat: np.ndarray, layout: PatchLayout, add_mean: bool = True) -> np.ndarray:
    mat = np.asarray(mat, dtype=float)
    if mat.shape != (layout.n, layout.d):
        raise LayoutMismatch(f"matrix shape {mat.shape} does not match layout ({layout.n}, {layout.d})")
    e = layout.patch_edge
    img = mat.reshape(layout.rows, layout.cols, e, e).transpose(0, 2, 1, 3)
    img = img.reshape(layout.rows * e, layout.cols * e)
    return img + layout.global_mean if add_mean else img
