"""Mean-field variational Bayes for the attack model.

The posterior is approximated by

    q(mu, Sigma) q(w) prod_i q(b_i) q(pi) q(m, V)

with q(mu, Sigma) and q(m, V) Normal-Inverse-Wishart, q(w) Gaussian, q(b_i)
Bernoulli and q(pi) Beta. Every update is the exact coordinate optimum
q_j ∝ exp E_{-j}[ln p(y, theta)], so the ELBO never decreases over a sweep.
The derivation of each update and of the ELBO is written out in DERIVATIONS.md.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np
from scipy.linalg import cho_solve
from scipy.special import betaln, multigammaln, xlogy
from scipy.stats import norm

from . import stats
from .errors import DimensionMismatch, InvalidParameter, NonFiniteElbo
from .model import Hyperparams, PosteriorSummary


@dataclass(frozen=True)
class VbConfig:
    max_iters: int = 100
    elbo_rel_tol: float = 1e-8
    seed: int = 0
    credible_level: float = 0.95
    init_jitter: float = 0.01

    def __post_init__(self):
        if self.max_iters < 1:
            raise InvalidParameter("max_iters must be at least 1")
        if not 0.0 < self.credible_level < 1.0:
            raise InvalidParameter("credible level must lie in (0, 1)")


@dataclass
class NiwFactor:
    """q(mean, Cov) = N(mean | loc, Cov / kappa) IW(Cov | dof, scale)."""

    loc: np.ndarray
    kappa: float
    dof: float
    scale: np.ndarray
    # Moments, refreshed by ``refresh``.
    e_inv: np.ndarray = field(init=False, repr=False)
    e_logdet: float = field(init=False, repr=False)
    logdet_scale: float = field(init=False, repr=False)

    def __post_init__(self):
        self.refresh()

    def refresh(self) -> None:
        chol = stats.cholesky(self.scale)
        self.e_inv = self.dof * stats.spd_inverse(self.scale, chol)
        self.e_logdet = stats.expected_logdet_invwishart(self.dof, chol)
        self.logdet_scale = stats.logdet_chol(chol)

    @property
    def d(self) -> int:
        return self.loc.shape[0]

    def entropy(self) -> float:
        d, nu = self.d, self.dof
        h_iw = (-0.5 * nu * self.logdet_scale + 0.5 * nu * d * math.log(2.0)
                + multigammaln(0.5 * nu, d) + 0.5 * (nu + d + 1) * self.e_logdet + 0.5 * nu * d)
        h_normal = 0.5 * d * (stats.LOG_2PI + 1.0) + 0.5 * (self.e_logdet - d * math.log(self.kappa))
        return h_iw + h_normal

    def expected_log_prior(self, loc0: np.ndarray, dof0: float, scale0: np.ndarray) -> float:
        """E_q[ln N(mean | loc0, Cov) + ln IW(Cov | dof0, scale0)] (unit prior kappa)."""
        d = self.d
        off = self.loc - loc0
        e_normal = -0.5 * (d * stats.LOG_2PI + self.e_logdet + off @ self.e_inv @ off + d / self.kappa)
        e_iw = (0.5 * dof0 * stats.logdet_chol(stats.cholesky(scale0)) - 0.5 * dof0 * d * math.log(2.0)
                - multigammaln(0.5 * dof0, d) - 0.5 * (dof0 + d + 1) * self.e_logdet
                - 0.5 * float(np.sum(scale0 * self.e_inv)))
        return e_normal + e_iw


@dataclass
class VbState:
    mu_sigma: NiwFactor
    w_mean: np.ndarray
    w_cov: np.ndarray
    r: np.ndarray  # <b_i>
    a: float
    b: float
    m_v: NiwFactor
    e_ln_pi: float = field(init=False)
    e_ln_1mpi: float = field(init=False)

    def __post_init__(self):
        self.refresh_pi()

    def refresh_pi(self) -> None:
        psi_ab = stats.digamma(self.a + self.b)
        self.e_ln_pi = stats.digamma(self.a) - psi_ab
        self.e_ln_1mpi = stats.digamma(self.b) - psi_ab

    @property
    def w_second(self) -> np.ndarray:
        return self.w_cov + np.outer(self.w_mean, self.w_mean)


def initial_state(y: np.ndarray, h: Hyperparams, cfg: VbConfig) -> VbState:
    """Priors for every factor; bit responsibilities at 1/2 plus a small seeded jitter."""
    n = y.shape[0]
    rng = stats.make_rng(cfg.seed, "init")
    r = 0.5 + rng.uniform(-cfg.init_jitter, cfg.init_jitter, size=n)
    return VbState(
        mu_sigma=NiwFactor(h.mu0.copy(), 1.0, h.omega0, h.sigma0.copy()),
        w_mean=h.m0.copy(),
        w_cov=h.v0.copy(),
        r=r,
        a=h.a_pi,
        b=h.b_pi,
        m_v=NiwFactor(h.m0.copy(), 1.0, h.omega0, h.v0.copy()),
    )


def vb_update_mu_sigma(y: np.ndarray, s: VbState, h: Hyperparams) -> VbState:
    """NIW update from the expected hosts y_i - <b_i><w> plus their spread."""
    n = y.shape[0]
    resid = y - np.outer(s.r, s.w_mean)
    rbar = resid.mean(axis=0)
    centered = resid - rbar
    off = rbar - h.mu0
    spread = s.r.sum() * s.w_second - (s.r @ s.r) * np.outer(s.w_mean, s.w_mean)
    scale = h.sigma0 + (n / (n + 1.0)) * np.outer(off, off) + spread + centered.T @ centered
    s.mu_sigma = NiwFactor((h.mu0 + n * rbar) / (n + 1.0), n + 1.0, h.omega0 + n,
                           0.5 * (scale + scale.T))
    return s


def vb_update_w(y: np.ndarray, s: VbState, h: Hyperparams) -> VbState:
    e_sinv = s.mu_sigma.e_inv
    e_vinv = s.m_v.e_inv
    # <b_i^2> = <b_i> for a Bernoulli factor.
    prec = e_vinv + s.r.sum() * e_sinv
    lin = e_vinv @ s.m_v.loc + e_sinv @ (s.r @ (y - s.mu_sigma.loc))
    chol = stats.cholesky(0.5 * (prec + prec.T))
    s.w_mean = cho_solve((chol, True), lin)
    s.w_cov = stats.spd_inverse(prec, chol)
    return s


def b_logit(y: np.ndarray, s: VbState) -> np.ndarray:
    e_sinv = s.mu_sigma.e_inv
    gain = (y - s.mu_sigma.loc) @ (e_sinv @ s.w_mean)
    penalty = 0.5 * float(np.sum(e_sinv * s.w_second))
    return s.e_ln_pi - s.e_ln_1mpi + gain - penalty


def vb_update_b(y: np.ndarray, s: VbState, h: Hyperparams) -> VbState:
    s.r = stats.logistic(b_logit(y, s))
    return s


def vb_update_pi(y: np.ndarray, s: VbState, h: Hyperparams) -> VbState:
    total = float(s.r.sum())
    s.a = h.a_pi + total
    s.b = h.b_pi + s.r.shape[0] - total
    s.refresh_pi()
    return s


def vb_update_m_v(y: np.ndarray, s: VbState, h: Hyperparams) -> VbState:
    """NIW update from one Gaussian-uncertain observation of w."""
    off = s.w_mean - h.m0
    scale = h.v0 + s.w_cov + 0.5 * np.outer(off, off)
    s.m_v = NiwFactor(0.5 * (h.m0 + s.w_mean), 2.0, h.omega0 + 1.0, 0.5 * (scale + scale.T))
    return s


UPDATES = (vb_update_mu_sigma, vb_update_w, vb_update_b, vb_update_pi, vb_update_m_v)


def compute_elbo(y: np.ndarray, s: VbState, h: Hyperparams) -> float:
    """E_q[ln p(y, theta)] - E_q[ln q(theta)], every term in closed form."""
    n, d = y.shape
    ms, mv = s.mu_sigma, s.m_v
    r = s.r
    ww = s.w_second

    # ln N(y_i | mu + b_i w, Sigma): the expected outer product of y_i - mu - b_i w
    # is (ybar_i - loc)(.)^T + <b_i><ww^T> - <b_i>^2 <w><w>^T + Sigma / kappa.
    resid = y - np.outer(r, s.w_mean) - ms.loc
    scatter = resid.T @ resid + r.sum() * ww - (r @ r) * np.outer(s.w_mean, s.w_mean)
    e_lik = -0.5 * (n * d * stats.LOG_2PI + n * ms.e_logdet
                    + float(np.sum(ms.e_inv * scatter)) + n * d / ms.kappa)

    # ln Bernoulli(b_i | pi) and ln Beta(pi | a_pi, b_pi).
    r_sum = float(r.sum())
    e_bits = r_sum * s.e_ln_pi + (n - r_sum) * s.e_ln_1mpi
    e_pi = (-float(betaln(h.a_pi, h.b_pi)) + (h.a_pi - 1.0) * s.e_ln_pi
            + (h.b_pi - 1.0) * s.e_ln_1mpi)

    # ln N(w | m, V) with w independent of (m, V) under q.
    off = s.w_mean - mv.loc
    e_w = -0.5 * (d * stats.LOG_2PI + mv.e_logdet
                  + float(np.sum(mv.e_inv * (s.w_cov + np.outer(off, off)))) + d / mv.kappa)

    # NIW priors on (mu, Sigma) and (m, V).
    e_priors = (ms.expected_log_prior(h.mu0, h.omega0, h.sigma0)
                + mv.expected_log_prior(h.m0, h.omega0, h.v0))

    # Entropies.
    h_w = 0.5 * d * (stats.LOG_2PI + 1.0) + 0.5 * stats.logdet_chol(stats.cholesky(s.w_cov))
    h_b = -float(np.sum(xlogy(r, r) + xlogy(1.0 - r, 1.0 - r)))
    h_pi = (float(betaln(s.a, s.b)) - (s.a - 1.0) * stats.digamma(s.a)
            - (s.b - 1.0) * stats.digamma(s.b) + (s.a + s.b - 2.0) * stats.digamma(s.a + s.b))

    elbo = (e_lik + e_bits + e_pi + e_w + e_priors
            + ms.entropy() + mv.entropy() + h_w + h_b + h_pi)
    if not np.isfinite(elbo):
        raise NonFiniteElbo(f"ELBO evaluated to {elbo}")
    return float(elbo)


def sweep(y: np.ndarray, s: VbState, h: Hyperparams) -> VbState:
    for update in UPDATES:
        update(y, s, h)
    return s


@dataclass
class ElboTrace:
    elbo: list = field(default_factory=list)
    delta_rel: list = field(default_factory=list)
    converged: bool = False

    @property
    def iters(self) -> list:
        return list(range(1, len(self.elbo) + 1))


def summarize(s: VbState, level: float) -> PosteriorSummary:
    z = norm.ppf(0.5 * (1.0 + level))
    sd = np.sqrt(np.diag(s.w_cov))
    return PosteriorSummary(
        method="vb",
        w_hat=s.w_mean.copy(),
        ci_lo=s.w_mean - z * sd,
        ci_hi=s.w_mean + z * sd,
        b_hat=(s.r > 0.5).astype(np.int8),
        b_soft=s.r.copy(),
        pi_hat=s.a / (s.a + s.b),
        level=level,
    )


def run_vb(y: np.ndarray, h: Hyperparams, cfg: VbConfig = VbConfig(),
           state: VbState | None = None):
    """Coordinate ascent until the relative ELBO change drops below tolerance."""
    y = np.asarray(y, dtype=float)
    if y.ndim != 2 or y.shape[1] != h.d:
        raise DimensionMismatch(f"data shape {y.shape} does not match d={h.d}")
    s = initial_state(y, h, cfg) if state is None else state
    trace = ElboTrace()
    prev = None
    for _ in range(cfg.max_iters):
        sweep(y, s, h)
        elbo = compute_elbo(y, s, h)
        delta = math.inf if prev is None else abs(elbo - prev) / abs(elbo)
        trace.elbo.append(elbo)
        trace.delta_rel.append(delta)
        prev = elbo
        if delta < cfg.elbo_rel_tol:
            trace.converged = True
            break
    summary = summarize(s, cfg.credible_level)
    summary.diagnostics.update(
        iterations=len(trace.elbo),
        converged=trace.converged,
        elbo_last=trace.elbo[-1],
    )
    return trace, summary, s
