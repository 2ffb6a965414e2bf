"""Synthetic hosts, watermark and bitstream for the simulated experiments."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from . import stats
from .codec import embed, scale_to_dwr
from .errors import InvalidParameter


@dataclass(frozen=True)
class SynthConfig:
    n: int = 4096
    d: int = 64
    dwr_db: float = 30.0
    seed: int = 0
    p_one: float = 0.5

    def __post_init__(self):
        if self.n < 1 or self.d < 1:
            raise InvalidParameter(f"n and d must be positive, got n={self.n}, d={self.d}")
        if not 0.0 <= self.p_one <= 1.0:
            raise InvalidParameter(f"p_one must lie in [0, 1], got {self.p_one}")


@dataclass
class SynthData:
    hosts: np.ndarray
    w: np.ndarray
    bits: np.ndarray
    y: np.ndarray
    host_cov: np.ndarray


def draw_host_covariance(d: int, rng: np.random.Generator) -> np.ndarray:
    return stats.invwishart_sample(d + 1, np.eye(d), rng)


def generate_hosts(cfg: SynthConfig, rng: np.random.Generator,
                   return_cov: bool = False):
    """n i.i.d. rows from N(0, S) where S ~ IW(d + 1, I) is drawn once for all rows."""
    cov = draw_host_covariance(cfg.d, rng)
    chol = stats.cholesky(cov)
    hosts = rng.standard_normal((cfg.n, cfg.d)) @ chol.T
    return (hosts, cov) if return_cov else hosts


def draw_raw_watermark(d: int, rng: np.random.Generator) -> np.ndarray:
    """Unscaled watermark with zero empirical mean.

    RNG consumption order: mean covariance, mean vector, watermark covariance,
    watermark vector.
    """
    eye = np.eye(d)
    mean_cov = stats.invwishart_sample(d + 1, eye, rng)
    mean = stats.mvn_sample(np.zeros(d), mean_cov, rng)
    cov = stats.invwishart_sample(d + 1, eye, rng)
    w = stats.mvn_sample(mean, cov, rng)
    return w - w.mean()


def generate_watermark(cfg: SynthConfig, hosts: np.ndarray,
                       rng: np.random.Generator) -> np.ndarray:
    return scale_to_dwr(hosts, draw_raw_watermark(cfg.d, rng), cfg.dwr_db)


def generate_bits(cfg: SynthConfig, rng: np.random.Generator) -> np.ndarray:
    return stats.bernoulli_sample(np.full(cfg.n, cfg.p_one), rng)


def generate(cfg: SynthConfig) -> SynthData:
    """Full synthetic draw; hosts, watermark and bits each use their own sub-stream."""
    hosts, cov = generate_hosts(cfg, stats.make_rng(cfg.seed, "hosts"), return_cov=True)
    w = generate_watermark(cfg, hosts, stats.make_rng(cfg.seed, "watermark"))
    bits = generate_bits(cfg, stats.make_rng(cfg.seed, "bits"))
    return SynthData(hosts=hosts, w=w, bits=bits, y=embed(hosts, w, bits), host_cov=cov)
