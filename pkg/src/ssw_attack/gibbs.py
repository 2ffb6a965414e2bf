"""Gibbs sampler over the exact conjugate full conditionals of the attack model.

Each block has a ``*_conditional`` function returning the parameters of its
full conditional and an ``update_*`` function drawing from it. A sweep visits
(mu, Sigma), w, b, pi, (m, V) and then recomputes the hosts x_i = y_i - b_i w.
"""

from __future__ import annotations

import logging
from dataclasses import dataclass, field

import numpy as np
from scipy.linalg import cho_solve, solve_triangular

from . import stats
from .errors import DimensionMismatch, InvalidParameter, NonFiniteLogJoint
from .model import Hyperparams, PosteriorSummary, beta_logpdf, invwishart_logpdf

log = logging.getLogger(__name__)


@dataclass(frozen=True)
class McmcConfig:
    total_iters: int = 2000
    burn_in: int = 1000
    seed: int = 0
    thinning: int = 1
    credible_level: float = 0.95

    def __post_init__(self):
        if not 0 <= self.burn_in < self.total_iters:
            raise InvalidParameter("burn_in must satisfy 0 <= burn_in < total_iters")
        if self.thinning < 1:
            raise InvalidParameter("thinning must be at least 1")
        if not 0.0 < self.credible_level < 1.0:
            raise InvalidParameter("credible level must lie in (0, 1)")


@dataclass
class ModelState:
    mu: np.ndarray
    sigma: np.ndarray
    m: np.ndarray
    v: np.ndarray
    w: np.ndarray
    b: np.ndarray
    pi: float
    x: np.ndarray


@dataclass
class ChainTrace:
    iters: list = field(default_factory=list)
    w: list = field(default_factory=list)
    pi: list = field(default_factory=list)
    log_joint: list = field(default_factory=list)
    b_ones: np.ndarray | None = None
    n_kept: int = 0

    @property
    def b_freq(self) -> np.ndarray:
        return self.b_ones / max(self.n_kept, 1)


def update_x(y: np.ndarray, w: np.ndarray, b: np.ndarray) -> np.ndarray:
    """Hosts implied by the current watermark and bits."""
    if y.ndim != 2 or w.shape != (y.shape[1],) or b.shape != (y.shape[0],):
        raise DimensionMismatch("y, w and b have inconsistent shapes")
    x = y.copy()
    on = b == 1
    x[on] = y[on] - w
    return x


def mu_sigma_conditional(x: np.ndarray, h: Hyperparams):
    """Normal-Inverse-Wishart conditional of (mu, Sigma) given hosts.

    Returns (mean, kappa, dof, scale) with Sigma ~ IW(dof, scale) and
    mu | Sigma ~ N(mean, Sigma / kappa).
    """
    n = x.shape[0]
    if n == 0:
        return h.mu0.copy(), 1.0, h.omega0, h.sigma0.copy()
    xbar = x.mean(axis=0)
    centered = x - xbar
    off = xbar - h.mu0
    scale = h.sigma0 + (n / (n + 1.0)) * np.outer(off, off) + centered.T @ centered
    mean = (h.mu0 + n * xbar) / (n + 1.0)
    return mean, n + 1.0, h.omega0 + n, 0.5 * (scale + scale.T)


def update_mu_sigma(x: np.ndarray, h: Hyperparams, rng: np.random.Generator):
    mean, kappa, dof, scale = mu_sigma_conditional(x, h)
    sigma = stats.invwishart_sample(dof, scale, rng)
    mu = stats.mvn_sample(mean, sigma / kappa, rng)
    return mu, sigma


def w_conditional_precision(y: np.ndarray, b: np.ndarray, mu: np.ndarray, sigma: np.ndarray,
                            m: np.ndarray, v: np.ndarray):
    """Precision P and linear term h of the Gaussian conditional of w (mean = P^-1 h)."""
    sigma_inv = stats.spd_inverse(sigma)
    v_inv = stats.spd_inverse(v)
    on = b == 1
    n1 = int(on.sum())
    resid = (y[on] - mu).sum(axis=0) if n1 else np.zeros_like(mu)
    prec = v_inv + n1 * sigma_inv
    lin = v_inv @ m + sigma_inv @ resid
    return 0.5 * (prec + prec.T), lin


def w_conditional(y, b, mu, sigma, m, v):
    """Mean and covariance of the conditional of w (for inspection and tests)."""
    prec, lin = w_conditional_precision(y, b, mu, sigma, m, v)
    chol = stats.cholesky(prec)
    return cho_solve((chol, True), lin), stats.spd_inverse(prec, chol)


def update_w(y: np.ndarray, state: ModelState, rng: np.random.Generator) -> np.ndarray:
    prec, lin = w_conditional_precision(y, state.b, state.mu, state.sigma, state.m, state.v)
    chol = stats.cholesky(prec)
    mean = cho_solve((chol, True), lin)
    z = rng.standard_normal(mean.shape[0])
    # chol^-T z has covariance prec^-1.
    return mean + solve_triangular(chol, z, lower=True, trans="T")


def b_conditional_logit(y: np.ndarray, mu: np.ndarray, sigma: np.ndarray, m: np.ndarray,
                        v: np.ndarray, pi: float) -> np.ndarray:
    """Log-odds of b_i = 1 with w integrated against its N(m, V) prior.

    A set bit makes y_i ~ N(mu + m, Sigma + V); a clear bit leaves y_i ~ N(mu, Sigma).
    """
    lp1 = stats.mvn_logpdf_chol(y, mu + m, stats.cholesky(sigma + v))
    lp0 = stats.mvn_logpdf_chol(y, mu, stats.cholesky(sigma))
    return np.log(pi) - np.log1p(-pi) + lp1 - lp0


def b_conditional(y, mu, sigma, m, v, pi) -> np.ndarray:
    return stats.logistic(b_conditional_logit(np.atleast_2d(y), mu, sigma, m, v, pi))


def update_b(y: np.ndarray, state: ModelState, rng: np.random.Generator) -> np.ndarray:
    p = b_conditional(y, state.mu, state.sigma, state.m, state.v, state.pi)
    return stats.bernoulli_sample(p, rng)


def pi_conditional(b: np.ndarray, h: Hyperparams) -> tuple[float, float]:
    ones = int(np.sum(b == 1))
    return h.a_pi + ones, h.b_pi + (b.shape[0] - ones)


def update_pi(b: np.ndarray, h: Hyperparams, rng: np.random.Generator) -> float:
    a, bb = pi_conditional(b, h)
    # Keep pi strictly inside (0, 1) so its log-odds stay finite.
    return float(np.clip(stats.beta_sample(a, bb, rng), 1e-300, 1.0 - 1e-16))


def m_v_conditional(w: np.ndarray, h: Hyperparams):
    """NIW conditional of (m, V) given w: (mean, kappa, dof, scale)."""
    off = w - h.m0
    scale = h.v0 + 0.5 * np.outer(off, off)
    return 0.5 * (h.m0 + w), 2.0, h.omega0 + 1.0, 0.5 * (scale + scale.T)


def update_m_v(w: np.ndarray, h: Hyperparams, rng: np.random.Generator):
    mean, kappa, dof, scale = m_v_conditional(w, h)
    v = stats.invwishart_sample(dof, scale, rng)
    m = stats.mvn_sample(mean, v / kappa, rng)
    return m, v


def log_joint(y: np.ndarray, state: ModelState, h: Hyperparams) -> float:
    """Log joint density of the hosts, bits and all latent parameters."""
    chol_s = stats.cholesky(state.sigma)
    chol_v = stats.cholesky(state.v)
    n1 = int(np.sum(state.b == 1))
    n = state.b.shape[0]
    total = float(np.sum(stats.mvn_logpdf_chol(state.x, state.mu, chol_s)))
    total += n1 * np.log(state.pi) + (n - n1) * np.log1p(-state.pi)
    total += stats.mvn_logpdf_chol(state.w, state.m, chol_v)
    total += stats.mvn_logpdf_chol(state.mu, h.mu0, chol_s)
    total += invwishart_logpdf(state.sigma, h.omega0, h.sigma0)
    total += stats.mvn_logpdf_chol(state.m, h.m0, chol_v)
    total += invwishart_logpdf(state.v, h.omega0, h.v0)
    total += beta_logpdf(state.pi, h.a_pi, h.b_pi)
    return float(total)


def initial_state(y: np.ndarray, h: Hyperparams, rng: np.random.Generator) -> ModelState:
    n, d = y.shape
    b = stats.bernoulli_sample(np.full(n, 0.5), rng)
    w = np.zeros(d)
    return ModelState(mu=h.mu0.copy(), sigma=h.sigma0.copy(), m=h.m0.copy(), v=h.v0.copy(),
                      w=w, b=b, pi=0.5, x=update_x(y, w, b))


def sweep(y: np.ndarray, state: ModelState, h: Hyperparams, rng: np.random.Generator) -> ModelState:
    state.mu, state.sigma = update_mu_sigma(state.x, h, rng)
    state.w = update_w(y, state, rng)
    state.b = update_b(y, state, rng)
    state.pi = update_pi(state.b, h, rng)
    state.m, state.v = update_m_v(state.w, h, rng)
    state.x = update_x(y, state.w, state.b)
    return state


def summarize_trace(trace: ChainTrace, level: float) -> PosteriorSummary:
    w = np.asarray(trace.w)
    lo, hi = np.percentile(w, [50.0 * (1.0 - level), 50.0 * (1.0 + level)], axis=0)
    b_soft = trace.b_freq
    return PosteriorSummary(
        method="mcmc",
        w_hat=w.mean(axis=0),
        ci_lo=lo,
        ci_hi=hi,
        b_hat=(b_soft > 0.5).astype(np.int8),
        b_soft=b_soft,
        pi_hat=float(np.mean(trace.pi)),
        level=level,
    )


def run_gibbs(y: np.ndarray, h: Hyperparams, cfg: McmcConfig = McmcConfig(),
              state: ModelState | None = None):
    """Run one chain and summarize the kept (post burn-in, thinned) draws."""
    y = np.asarray(y, dtype=float)
    if y.ndim != 2 or y.shape[1] != h.d:
        raise DimensionMismatch(f"data shape {y.shape} does not match d={h.d}")
    rng = stats.make_rng(cfg.seed, "chain")
    if state is None:
        state = initial_state(y, h, rng)
    trace = ChainTrace(b_ones=np.zeros(y.shape[0], dtype=np.int64))
    for it in range(cfg.total_iters):
        sweep(y, state, h, rng)
        lj = log_joint(y, state, h)
        if not np.isfinite(lj):
            raise NonFiniteLogJoint(f"log joint density became {lj} at sweep {it}")
        if it >= cfg.burn_in and (it - cfg.burn_in) % cfg.thinning == 0:
            trace.iters.append(it)
            trace.w.append(state.w.copy())
            trace.pi.append(state.pi)
            trace.log_joint.append(lj)
            trace.b_ones += state.b
            trace.n_kept += 1
        if (it + 1) % 500 == 0:
            log.debug("sweep %d log joint %.6g", it + 1, lj)
    summary = summarize_trace(trace, cfg.credible_level)
    summary.diagnostics.update(
        n_kept=trace.n_kept,
        log_joint_last=trace.log_joint[-1],
    )
    return trace, summary
