import math

import numpy as np
import pytest
from scipy import stats as sps

import oracles
from ssw_attack import datagen, gibbs, stats
from ssw_attack.errors import DegenerateData, InvalidParameter
from ssw_attack.model import Hyperparams, init_hyperparams, invwishart_logpdf


def _h1(mu0=0.0, sigma0=1.0, m0=0.0, v0=1.0, a=2.0, b=2.0, omega0=2.0):
    return oracles.scalar_hyper(mu0=mu0, sigma0=sigma0, omega0=omega0, m0=m0, v0=v0, a=a, b=b)


def _arr(*v):
    return np.array(v, dtype=float)


# Hyper-parameters ------------------------------------------------------------

def test_init_hyperparams_schedule():
    data = datagen.generate(datagen.SynthConfig(seed=0))
    h = init_hyperparams(data.y, 30.0)
    assert h.a_pi == h.b_pi == 2048
    assert h.omega0 == 65
    assert np.allclose(h.v0, h.sigma0 / 1000.0, rtol=1e-15)
    assert np.allclose(h.sigma0, np.cov(data.y.T, bias=True))
    assert np.array_equal(h.mu0, h.m0)


def test_constant_rows_are_degenerate():
    with pytest.raises(DegenerateData):
        init_hyperparams(np.ones((10, 3)), 30.0)


def test_hyperparams_validation():
    with pytest.raises(InvalidParameter):
        _h1(omega0=-0.5)
    with pytest.raises(InvalidParameter):
        _h1(a=0.0)


def test_invwishart_logpdf_matches_scipy():
    x = np.array([[1.2, 0.3], [0.3, 0.7]])
    s = np.array([[2.0, -0.1], [-0.1, 1.0]])
    assert math.isclose(invwishart_logpdf(x, 5.0, s), sps.invwishart(5.0, s).logpdf(x), rel_tol=1e-12)


# (mu, Sigma) -----------------------------------------------------------------

def test_mu_sigma_empty_data_is_prior():
    h = _h1(mu0=0.3, sigma0=2.0)
    mean, kappa, dof, scale = gibbs.mu_sigma_conditional(np.zeros((0, 1)), h)
    assert mean[0] == 0.3 and kappa == 1.0 and dof == h.omega0 and scale[0, 0] == 2.0


def test_mu_sigma_hand_values():
    mean, kappa, dof, scale = gibbs.mu_sigma_conditional(np.array([[1.0], [3.0]]), _h1())
    assert math.isclose(scale[0, 0], 1 + (2 / 3) * 4 + 2)
    assert math.isclose(mean[0], 4 / 3)
    assert kappa == 3.0 and dof == 4.0


def test_mu_long_run_mean():
    h = _h1()
    x = np.array([[1.0], [3.0]])
    rng = stats.make_rng(0)
    mus = np.array([gibbs.update_mu_sigma(x, h, rng)[0][0] for _ in range(100_000)])
    # mu is Student-t with finite variance here (dof 4).
    assert abs(mus.mean() - 4 / 3) < 4 * mus.std() / math.sqrt(mus.size)


# w ---------------------------------------------------------------------------

def test_w_no_set_bits_is_prior():
    mean, cov = gibbs.w_conditional(np.ones((3, 2)), np.zeros(3), np.zeros(2), np.eye(2),
                                    _arr(0.5, -1.0), np.diag([2.0, 3.0]))
    assert np.allclose(mean, [0.5, -1.0]) and np.allclose(cov, np.diag([2.0, 3.0]))


def test_w_scalar_hand_values():
    mean, cov = gibbs.w_conditional(np.array([[2.0]]), np.array([1]), _arr(0.0), np.eye(1),
                                    _arr(0.0), np.eye(1))
    assert math.isclose(cov[0, 0], 0.5) and math.isclose(mean[0], 1.0)


def test_w_likelihood_dominates_with_many_bits():
    n = 1_000_000
    y = np.full((n, 1), 0.7)
    mean, _ = gibbs.w_conditional(y, np.ones(n, dtype=np.int8), _arr(0.0), np.eye(1), _arr(5.0), np.eye(1))
    assert abs(mean[0] - 0.7) < 1e-5


# b ---------------------------------------------------------------------------

def test_b_symmetric_branch_returns_prior():
    y = np.random.default_rng(0).standard_normal((20, 3))
    p = gibbs.b_conditional(y, np.zeros(3), np.eye(3), np.zeros(3), 1e-14 * np.eye(3), 0.3)
    assert np.allclose(p, 0.3, atol=1e-12)


def test_b_prior_dominance():
    p = gibbs.b_conditional(np.array([[0.0]]), _arr(0.0), np.eye(1), _arr(3.0), np.eye(1), 1 - 1e-16)
    assert p[0] > 1 - 1e-10


def test_b_scalar_density_oracle():
    p = gibbs.b_conditional(np.array([[3.0]]), _arr(0.0), np.eye(1), _arr(3.0), np.eye(1), 0.5)
    ratio = sps.norm.pdf(3, 0, 1) / sps.norm.pdf(3, 3, math.sqrt(2))
    assert math.isclose(p[0], 1 / (1 + ratio), rel_tol=1e-12)


def test_b_far_outlier_does_not_overflow():
    p = gibbs.b_conditional(np.array([[1e8]]), _arr(0.0), np.eye(1), _arr(1.0), 1e-6 * np.eye(1), 0.5)
    assert np.isfinite(p[0]) and 0 <= p[0] <= 1


# pi --------------------------------------------------------------------------

def test_pi_counting():
    assert gibbs.pi_conditional(np.array([1, 1, 0]), _h1(a=2, b=2)) == (4, 3)
    assert gibbs.pi_conditional(np.zeros(5), _h1(a=2.5, b=2.5)) == (2.5, 7.5)


def test_pi_long_run_mean():
    h = _h1(a=2, b=2)
    rng = stats.make_rng(1)
    draws = [gibbs.update_pi(np.array([1, 1, 0]), h, rng) for _ in range(100_000)]
    assert abs(np.mean(draws) - 4 / 7) < 0.005


# (m, V) ----------------------------------------------------------------------

def test_m_v_zero_offset():
    h = _h1(m0=0.4, v0=0.9)
    mean, kappa, dof, scale = gibbs.m_v_conditional(_arr(0.4), h)
    assert mean[0] == 0.4 and scale[0, 0] == 0.9 and kappa == 2.0 and dof == h.omega0 + 1


def test_m_v_hand_values():
    mean, _, _, scale = gibbs.m_v_conditional(_arr(2.0), _h1())
    assert math.isclose(scale[0, 0], 3.0) and math.isclose(mean[0], 1.0)


def test_m_long_run_mean():
    h = _h1(omega0=6.0)
    rng = stats.make_rng(2)
    ms = np.array([gibbs.update_m_v(_arr(2.0), h, rng)[0][0] for _ in range(100_000)])
    assert abs(ms.mean() - 1.0) < 4 * ms.std() / math.sqrt(ms.size)


# x ---------------------------------------------------------------------------

def test_update_x_cases():
    y = np.arange(6.0).reshape(3, 2)
    w = _arr(0.5, 0.25)
    assert np.array_equal(gibbs.update_x(y, w, np.zeros(3, dtype=int)), y)
    x = gibbs.update_x(y, w, np.array([0, 1, 0]))
    assert np.array_equal(x[[0, 2]], y[[0, 2]])
    assert np.array_equal(x[1] + w, y[1])


# Oracles ---------------------------------------------------------------------

@pytest.mark.parametrize("block", sorted(oracles.CONJUGACY_ORACLES))
def test_conjugacy_grid_quadrature(block):
    assert oracles.CONJUGACY_ORACLES[block]() < 1e-4


def test_grid_oracle_catches_a_wrong_conditional(monkeypatch):
    real = gibbs.mu_sigma_conditional

    def off_by_one(x, h):
        mean, kappa, dof, scale = real(x, h)
        return mean, kappa - 1.0, dof, scale

    monkeypatch.setattr(gibbs, "mu_sigma_conditional", off_by_one)
    assert oracles.oracle_mu_sigma() > 1e-2


@pytest.mark.slow
def test_enumeration_oracle():
    z, exact, freq = oracles.enumeration_check()
    assert z < 3.0
    assert math.isclose(exact.sum(), 1.0) and math.isclose(freq.sum(), 1.0)


def _toy():
    y = np.array([[-0.4], [0.3], [1.9], [1.1], [2.6], [0.9]])
    return y, init_hyperparams(y, 10.0)


def test_window_stability_on_toy():
    y, h = _toy()
    rng = stats.make_rng(3, "chain")
    state = gibbs.initial_state(y, h, rng)
    rows = []
    for _ in range(1000):
        gibbs.sweep(y, state, h, rng)
        rows.append([state.pi, state.w[0], state.mu[0], state.b.mean()])
    rows = np.array(rows)

    def window(lo, hi):
        seg = rows[lo:hi]
        batches = seg.reshape(10, -1, seg.shape[1]).mean(axis=1)
        return seg.mean(axis=0), batches.std(axis=0, ddof=1) / math.sqrt(10)

    m1, s1 = window(200, 600)
    m2, s2 = window(600, 1000)
    assert np.all(np.abs(m1 - m2) < 4 * np.hypot(s1, s2))


def test_chain_invariants():
    data = datagen.generate(datagen.SynthConfig(n=200, d=4, seed=5))
    h = init_hyperparams(data.y, 30.0)
    rng = stats.make_rng(5, "chain")
    state = gibbs.initial_state(data.y, h, rng)
    for _ in range(50):
        gibbs.sweep(data.y, state, h, rng)
        assert np.array_equal(state.x, data.y - np.outer(state.b, state.w))
        for mat in (state.sigma, state.v):
            assert np.all(np.linalg.eigvalsh(mat) > 0)
        assert 0 < state.pi < 1


def test_run_gibbs_determinism_and_summary():
    data = datagen.generate(datagen.SynthConfig(n=300, d=4, seed=6))
    h = init_hyperparams(data.y, 30.0)
    cfg = gibbs.McmcConfig(total_iters=60, burn_in=20, seed=4, thinning=2)
    t1, s1 = gibbs.run_gibbs(data.y, h, cfg)
    t2, s2 = gibbs.run_gibbs(data.y, h, cfg)
    assert np.array_equal(np.array(t1.w), np.array(t2.w))
    assert t1.log_joint == t2.log_joint and np.array_equal(t1.b_ones, t2.b_ones)
    assert t1.iters == list(range(20, 60, 2)) and t1.n_kept == 20
    assert np.all(s1.ci_lo <= s1.w_hat) and np.all(s1.w_hat <= s1.ci_hi)
    assert np.array_equal(s1.b_hat, (s1.b_soft > 0.5).astype(np.int8))
    assert s1.diagnostics["n_kept"] == 20


def test_null_model_intervals_cover_zero():
    # No bits set and a prior that insists pi is near zero.
    cfg = datagen.SynthConfig(n=400, d=8, seed=8)
    hosts = datagen.generate_hosts(cfg, stats.make_rng(8, "hosts"))
    base = init_hyperparams(hosts, 20.0)
    h = Hyperparams(mu0=base.mu0, sigma0=base.sigma0, omega0=base.omega0, m0=base.m0,
                    v0=base.v0, a_pi=1.0, b_pi=1e4)
    _, summary = gibbs.run_gibbs(hosts, h, gibbs.McmcConfig(total_iters=600, burn_in=200, seed=8))
    covered = (summary.ci_lo <= 0) & (0 <= summary.ci_hi)
    assert covered.mean() >= 0.9


@pytest.mark.parametrize("kwargs", [dict(burn_in=10, total_iters=10), dict(thinning=0),
                                    dict(credible_level=1.0)])
def test_config_validation(kwargs):
    with pytest.raises(InvalidParameter):
        gibbs.McmcConfig(**kwargs)
