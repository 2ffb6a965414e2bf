"""Seedable samplers, log densities and the SPD matrix primitives used by both solvers.

All samplers take an explicit :class:`numpy.random.Generator`; nothing here
touches global random state.
"""

from __future__ import annotations

import math

import numpy as np
from scipy.linalg import solve_triangular

from .errors import InvalidDof, InvalidParameter, NotPositiveDefinite

LOG_2PI = math.log(2.0 * math.pi)

# Multipliers on trace(A)/d tried in order when a factorization fails.
JITTER_LADDER = (1e-12, 1e-11, 1e-10, 1e-9, 1e-8, 1e-7, 1e-6)

# Named sub-streams derived from a master seed. Order is part of the
# reproducibility contract; append only.
STREAMS = {
    "hosts": 0,
    "watermark": 1,
    "bits": 2,
    "chain": 3,
    "init": 4,
}


def make_rng(seed: int, stream: str | None = None) -> np.random.Generator:
    """PCG64 generator for ``seed``, optionally on an independent named sub-stream."""
    if seed < 0 or seed >= 2**64:
        raise InvalidParameter(f"seed must be a 64-bit unsigned integer, got {seed}")
    if stream is None:
        ss = np.random.SeedSequence(seed)
    else:
        ss = np.random.SeedSequence(seed, spawn_key=(STREAMS[stream],))
    return np.random.Generator(np.random.PCG64(ss))


def cholesky_jitter(a: np.ndarray) -> tuple[np.ndarray, float]:
    """Lower Cholesky factor and the diagonal jitter that was needed to get it.

    Tries the matrix as is, then adds eps * trace(a)/d * I for each eps on the
    ladder. Raises NotPositiveDefinite once the ladder is exhausted.
    """
    a = np.asarray(a, dtype=float)
    try:
        return np.linalg.cholesky(a), 0.0
    except np.linalg.LinAlgError:
        pass
    d = a.shape[0]
    scale = np.trace(a) / d
    if not np.isfinite(scale) or scale <= 0:
        raise NotPositiveDefinite("matrix has non-positive or non-finite trace")
    eye = np.eye(d)
    for eps in JITTER_LADDER:
        try:
            return np.linalg.cholesky(a + eps * scale * eye), eps * scale
        except np.linalg.LinAlgError:
            continue
    raise NotPositiveDefinite(f"factorization failed after jitter up to {JITTER_LADDER[-1]}")


def cholesky(a: np.ndarray) -> np.ndarray:
    return cholesky_jitter(a)[0]


def regularize_spd(a: np.ndarray) -> np.ndarray:
    """``a`` plus whatever jitter its factorization needs, so later factorizations need none."""
    jitter = cholesky_jitter(a)[1]
    return a + jitter * np.eye(a.shape[0]) if jitter else a


def logdet_chol(chol: np.ndarray) -> float:
    return 2.0 * float(np.sum(np.log(np.diag(chol))))


def spd_inverse(a: np.ndarray, chol: np.ndarray | None = None) -> np.ndarray:
    """Inverse of an SPD matrix through its Cholesky factor; result is symmetrized."""
    if chol is None:
        chol = cholesky(a)
    linv = solve_triangular(chol, np.eye(chol.shape[0]), lower=True)
    inv = linv.T @ linv
    return 0.5 * (inv + inv.T)


def mvn_sample(mean: np.ndarray, cov: np.ndarray, rng: np.random.Generator,
               chol: np.ndarray | None = None) -> np.ndarray:
    mean = np.asarray(mean, dtype=float)
    if chol is None:
        chol = cholesky(cov)
    z = rng.standard_normal(mean.shape[0])
    return mean + chol @ z


def mvn_logpdf_chol(x: np.ndarray, mean: np.ndarray, chol: np.ndarray) -> np.ndarray | float:
    """Gaussian log density given the lower Cholesky factor of the covariance.

    ``x`` may be a single vector or an (n, d) batch of rows.
    """
    x = np.asarray(x, dtype=float)
    single = x.ndim == 1
    diff = np.atleast_2d(x) - mean
    d = chol.shape[0]
    sol = solve_triangular(chol, diff.T, lower=True, check_finite=False)
    maha = np.einsum("ij,ij->j", sol, sol)
    out = -0.5 * (d * LOG_2PI + logdet_chol(chol) + maha)
    return float(out[0]) if single else out


def mvn_logpdf(x: np.ndarray, mean: np.ndarray, cov: np.ndarray) -> np.ndarray | float:
    return mvn_logpdf_chol(x, np.asarray(mean, dtype=float), cholesky(cov))


def _bartlett(dof: float, d: int, rng: np.random.Generator) -> np.ndarray:
    # Lower-triangular A with A @ A.T ~ Wishart(dof, I).
    a = np.zeros((d, d))
    a[np.diag_indices(d)] = np.sqrt(rng.chisquare(dof - np.arange(d)))
    rows, cols = np.tril_indices(d, k=-1)
    a[rows, cols] = rng.standard_normal(rows.size)
    return a


def _check_dof(dof: float, d: int) -> None:
    if not dof > d - 1:
        raise InvalidDof(f"degrees of freedom {dof} must exceed d - 1 = {d - 1}")


def wishart_sample(dof: float, scale: np.ndarray, rng: np.random.Generator) -> np.ndarray:
    """Draw W ~ Wishart(dof, scale) with E[W] = dof * scale."""
    scale = np.asarray(scale, dtype=float)
    d = scale.shape[0]
    _check_dof(dof, d)
    chol = cholesky(scale)
    m = chol @ _bartlett(dof, d, rng)
    w = m @ m.T
    return 0.5 * (w + w.T)


def invwishart_sample(dof: float, scale: np.ndarray, rng: np.random.Generator) -> np.ndarray:
    """Draw S ~ IW(dof, scale), i.e. S^-1 ~ Wishart(dof, scale^-1).

    With scale = L L^T, W = L^-T A A^T L^-1, so S = (A^-1 L^T)^T (A^-1 L^T);
    no explicit inverse of ``scale`` is formed.
    """
    scale = np.asarray(scale, dtype=float)
    d = scale.shape[0]
    _check_dof(dof, d)
    chol = cholesky(scale)
    a = _bartlett(dof, d, rng)
    m = solve_triangular(a, chol.T, lower=True, check_finite=False)
    s = m.T @ m
    return 0.5 * (s + s.T)


def beta_sample(a: float, b: float, rng: np.random.Generator) -> float:
    if not (a > 0 and b > 0):
        raise InvalidParameter(f"Beta parameters must be positive, got ({a}, {b})")
    return float(rng.beta(a, b))


def bernoulli_sample(p, rng: np.random.Generator):
    """Bernoulli draw(s); ``p`` may be a scalar or an array of probabilities."""
    p = np.asarray(p, dtype=float)
    if np.any(~(p >= 0.0) | ~(p <= 1.0)):
        raise InvalidParameter("Bernoulli probability outside [0, 1]")
    u = rng.random(p.shape)
    out = (u < p).astype(np.int8)
    return int(out) if out.ndim == 0 else out


_ASYMPTOTIC = (
    1.0 / 12.0,
    -1.0 / 120.0,
    1.0 / 252.0,
    -1.0 / 240.0,
    5.0 / 660.0,
    -691.0 / 32760.0,
    1.0 / 12.0,
)


def digamma(x):
    """Digamma function for positive arguments.

    Shifts the argument above 10 with psi(x) = psi(x + 1) - 1/x, then sums the
    Bernoulli-number asymptotic series. Absolute error is below 1e-13.
    """
    x = np.array(x, dtype=float)
    if np.any(~(x > 0)):
        raise InvalidParameter("digamma is only defined here for x > 0")
    acc = np.zeros_like(x)
    while True:
        low = x < 10.0
        if not low.any():
            break
        acc -= np.where(low, 1.0 / x, 0.0)
        x = np.where(low, x + 1.0, x)
    inv2 = 1.0 / (x * x)
    series = np.zeros_like(x)
    for coef in reversed(_ASYMPTOTIC):
        series = (series + coef) * inv2
    out = acc + np.log(x) - 0.5 / x - series
    return float(out) if out.ndim == 0 else out


def expected_logdet_invwishart(dof: float, chol_scale: np.ndarray) -> float:
    """E[ln|S|] for S ~ IW(dof, scale), given the Cholesky factor of ``scale``."""
    d = chol_scale.shape[0]
    psi = digamma(0.5 * (dof - np.arange(d)))
    return logdet_chol(chol_scale) - float(np.sum(psi)) - d * math.log(2.0)


def logistic(z, clamp: float = 700.0):
    z = np.clip(z, -clamp, clamp)
    return 1.0 / (1.0 + np.exp(-z))
