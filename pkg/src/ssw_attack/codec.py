"""Additive spread-spectrum embedding, DWR bookkeeping and a reference decoder."""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .errors import DimensionMismatch, ZeroWatermark


@dataclass(frozen=True)
class DecoderConfig:
    # The detector statistic is a stand-in: normalized correlation against w.
    threshold: float = 0.5
    # Subtracting the column mean also removes the mean watermark contribution,
    # so a zero host would no longer decode exactly. Off by default.
    center: bool = False


def _check_shapes(y: np.ndarray, w: np.ndarray, bits: np.ndarray | None = None) -> None:
    if y.ndim != 2:
        raise DimensionMismatch(f"signal matrix must be 2-D, got shape {y.shape}")
    if w.shape != (y.shape[1],):
        raise DimensionMismatch(f"watermark has shape {w.shape}, expected ({y.shape[1]},)")
    if bits is not None and bits.shape != (y.shape[0],):
        raise DimensionMismatch(f"bitstream has shape {bits.shape}, expected ({y.shape[0]},)")


def embed(hosts: np.ndarray, w: np.ndarray, bits: np.ndarray) -> np.ndarray:
    """Add ``w`` to every host row whose bit is set; other rows are copied unchanged."""
    hosts = np.asarray(hosts, dtype=float)
    w = np.asarray(w, dtype=float)
    bits = np.asarray(bits)
    _check_shapes(hosts, w, bits)
    out = hosts.copy()
    on = bits == 1
    out[on] = hosts[on] + w
    return out


def element_variance(a: np.ndarray) -> float:
    """Population (1/N) variance pooled over every element of ``a``."""
    return float(np.var(np.asarray(a, dtype=float)))


def measure_dwr(hosts: np.ndarray, w: np.ndarray) -> float:
    """Document-to-watermark ratio in dB."""
    var_w = element_variance(w)
    if var_w == 0.0:
        raise ZeroWatermark("watermark has zero variance")
    return 10.0 * math.log10(element_variance(hosts) / var_w)


def scale_to_dwr(hosts: np.ndarray, w: np.ndarray, target_dwr: float) -> np.ndarray:
    var_w = element_variance(w)
    if var_w == 0.0:
        raise ZeroWatermark("watermark has zero variance")
    c = math.sqrt(element_variance(hosts) / (var_w * 10.0 ** (target_dwr / 10.0)))
    return c * np.asarray(w, dtype=float)


def detection_statistic(y: np.ndarray, w: np.ndarray, center: bool = False) -> np.ndarray:
    """Normalized correlation y_i^T w / (w^T w), one value per row."""
    y = np.asarray(y, dtype=float)
    w = np.asarray(w, dtype=float)
    _check_shapes(y, w)
    ww = float(w @ w)
    if ww == 0.0:
        raise ZeroWatermark("watermark is the zero vector")
    if center:
        y = y - y.mean(axis=0)
    return y @ w / ww


def decode(y: np.ndarray, w: np.ndarray, cfg: DecoderConfig = DecoderConfig()) -> np.ndarray:
    return (detection_statistic(y, w, cfg.center) > cfg.threshold).astype(np.int8)
