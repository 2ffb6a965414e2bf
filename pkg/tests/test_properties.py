"""Property-based checks over randomly generated inputs."""

import math

import numpy as np
from hypothesis import given, settings
from hypothesis import strategies as st
from hypothesis.extra import numpy as hnp

from ssw_attack import codec, gibbs, ingest, matio, report, stats
from ssw_attack.model import PosteriorSummary

finite = st.floats(-1e6, 1e6, allow_nan=False, allow_infinity=False)


@st.composite
def image(draw):
    rows, cols = draw(st.integers(1, 6)), draw(st.integers(1, 6))
    return draw(hnp.arrays(np.uint8, (8 * rows, 8 * cols))).astype(float)


@given(image())
@settings(max_examples=40, deadline=None)
def test_patch_round_trip_exact(img):
    mat, layout = ingest.patchify(img)
    assert np.array_equal(ingest.unpatchify(mat, layout), img)
    assert abs(mat.mean()) < 1e-9


@given(st.integers(1, 40), st.integers(1, 10), st.data())
@settings(max_examples=60, deadline=None)
def test_embed_then_update_x_inverts(n, d, data):
    hosts = data.draw(hnp.arrays(float, (n, d), elements=st.floats(-255, 255)))
    w = data.draw(hnp.arrays(float, d, elements=st.floats(-10, 10)))
    bits = data.draw(hnp.arrays(np.int8, n, elements=st.integers(0, 1)))
    y = codec.embed(hosts, w, bits)
    x = gibbs.update_x(y, w, bits)
    assert np.array_equal(x[bits == 0], hosts[bits == 0])
    assert np.all(np.abs(x - hosts) <= 1e-9 * np.maximum(1.0, np.abs(hosts)))


@given(st.integers(1, 30), st.integers(1, 8), st.data())
@settings(max_examples=60, deadline=None)
def test_dyadic_embedding_inverts_bitwise(n, d, data):
    # Integer pixels plus a watermark on a 2^-10 grid: every sum is exact.
    hosts = data.draw(hnp.arrays(float, (n, d), elements=st.integers(0, 255).map(float)))
    w = data.draw(hnp.arrays(float, d, elements=st.integers(-2048, 2048).map(lambda k: k / 1024)))
    bits = data.draw(hnp.arrays(np.int8, n, elements=st.integers(0, 1)))
    assert np.array_equal(gibbs.update_x(codec.embed(hosts, w, bits), w, bits), hosts)


@given(hnp.arrays(float, (12, 5), elements=st.floats(-1e3, 1e3)),
       hnp.arrays(float, 5, elements=st.floats(-1e3, 1e3)),
       st.floats(-20, 60))
@settings(max_examples=80, deadline=None)
def test_scale_then_measure_fixed_point(hosts, w, target):
    if codec.element_variance(w) < 1e-12 or codec.element_variance(hosts) < 1e-12:
        return
    scaled = codec.scale_to_dwr(hosts, w, target)
    assert abs(codec.measure_dwr(hosts, scaled) - target) < 1e-9


@given(st.floats(1e-3, 1e3))
def test_digamma_recurrence(x):
    assert abs(stats.digamma(x + 1) - stats.digamma(x) - 1 / x) < 1e-10 * max(1.0, 1 / x)


@given(hnp.arrays(float, 20, elements=st.floats(-1e308, 1e308)))
def test_logistic_bounded_and_monotone(z):
    p = stats.logistic(np.sort(z))
    assert np.all((0 <= p) & (p <= 1)) and np.all(np.diff(p) >= 0)


@given(st.integers(1, 6), st.integers(0, 2**32 - 1))
@settings(max_examples=30, deadline=None)
def test_cholesky_reconstructs(d, seed):
    b = np.random.default_rng(seed).standard_normal((d, d))
    a = b @ b.T + np.eye(d)
    chol = stats.cholesky(a)
    assert np.allclose(chol @ chol.T, a, rtol=1e-12, atol=1e-12)


@given(hnp.arrays(np.int8, 30, elements=st.integers(0, 1)),
       hnp.arrays(np.int8, 30, elements=st.integers(0, 1)),
       hnp.arrays(float, 4, elements=st.floats(-5, 5)))
def test_metric_ranges(truth, guess, w_hat):
    w = np.array([1.0, -1.0, 0.5, 0.25])
    s = PosteriorSummary("vb", w_hat, w_hat, w_hat, guess, guess.astype(float), 0.5, 0.95)
    m = report.compute_metrics(truth, w, s)
    assert 0 <= m.p_e <= 1 and m.r_w >= 0
    assert m.p_e_flip == min(m.p_e, 1 - m.p_e) or math.isclose(m.p_e_flip, min(m.p_e, 1 - m.p_e))


@given(hnp.arrays(float, hnp.array_shapes(min_dims=2, max_dims=2, max_side=6)))
@settings(max_examples=40, deadline=None)
def test_matrix_file_round_trip(tmp_path_factory, mat):
    path = tmp_path_factory.mktemp("m") / "m.mat"
    matio.write_matrix(mat, path)
    assert matio.read_matrix(path).tobytes() == mat.astype("<f8").tobytes()


@given(st.floats(allow_nan=False, allow_infinity=False))
def test_csv_float_format_round_trips(x):
    assert float(report._fmt(x)) == x
