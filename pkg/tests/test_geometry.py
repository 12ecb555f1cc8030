import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st
from scipy import integrate, stats

from d2dunderlay import geometry as g


def test_rng_stream_reproducible_and_distinct():
    a = g.rng_stream(42, 0).random(5)
    assert np.array_equal(a, g.rng_stream(42, 0).random(5))
    assert not np.array_equal(a, g.rng_stream(42, 1).random(5))


def test_ppp_empty_for_zero_density():
    assert g.sample_ppp_disk(0.0, 500.0, g.rng_stream(1)).shape == (0, 2)


@pytest.mark.parametrize("lam, mean", [(2e-5, 15.708), (5e-5, 39.270)])
def test_ppp_mean_count(lam, mean):
    rng = g.rng_stream(3)
    counts = [len(g.sample_ppp_disk(lam, 500.0, rng)) for _ in range(20000)]
    se = math.sqrt(mean / 20000)
    assert abs(np.mean(counts) - mean) < 4 * se


def test_ppp_points_inside_disk():
    pts = g.sample_ppp_disk(1e-3, 100.0, g.rng_stream(4), center=(10.0, -5.0))
    assert np.all(np.hypot(pts[:, 0] - 10, pts[:, 1] + 5) <= 100.0)


def test_thinning_density_chi_square():
    # thinned counts over many windows should be Poisson(q * lambda * area)
    rng = g.rng_stream(5)
    lam, R, q = 5e-5, 500.0, 0.5
    counts = np.array([len(g.thin(g.sample_ppp_disk(lam, R, rng), q, rng))
                       for _ in range(5000)])
    mu = q * lam * math.pi * R ** 2
    edges = np.arange(0, 45)
    observed = np.array([np.sum(counts == k) for k in edges[:-1]] + [np.sum(counts >= 44)])
    expected = np.append(stats.poisson.pmf(edges[:-1], mu), stats.poisson.sf(43, mu)) * len(counts)
    keep = expected >= 5
    obs = np.append(observed[keep], observed[~keep].sum())
    exp = np.append(expected[keep], expected[~keep].sum())
    assert stats.chisquare(obs, exp).pvalue > 0.01


def test_uniform_disk_area_law():
    rng = g.rng_stream(6)
    pts = g.sample_uniform_disk(g.ORIGIN, 50.0, rng, size=200000)
    r = np.hypot(pts[:, 0], pts[:, 1])
    for t in (0.25, 0.5, 0.75):
        p = t * t
        assert abs(np.mean(r <= t * 50) - p) < 4 * math.sqrt(p * (1 - p) / len(r))
    assert np.mean(r) == pytest.approx(2 / 3 * 50, rel=5e-3)


def test_uniform_disk_single_point_and_zero_radius():
    p = g.sample_uniform_disk((3.0, 4.0), 1e-12, g.rng_stream(7))
    assert p.shape == (2,)
    assert p == pytest.approx([3.0, 4.0])


def test_distance_examples():
    assert g.distance((0, 0), (3, 4)) == 5.0
    assert g.distance((1, 1), (4, 5)) == 5.0
    assert g.distance((2, 2), (2, 2)) == 0.0


@given(st.tuples(st.floats(-1e4, 1e4), st.floats(-1e4, 1e4)),
       st.tuples(st.floats(-1e4, 1e4), st.floats(-1e4, 1e4)))
def test_distance_symmetric(a, b):
    assert g.distance(a, b) == g.distance(b, a)
    assert (g.distance(a, b) == 0) == (a == b or np.allclose(a, b, atol=0, rtol=0))


def test_pairwise_pdf_normalized_and_mean():
    R = 500.0
    assert g.pdf_pairwise_distance(0.0, R) == 0.0
    total, _ = integrate.quad(g.pdf_pairwise_distance, 0, 2 * R, args=(R,), epsabs=1e-12)
    assert total == pytest.approx(1.0, abs=1e-9)
    mean, _ = integrate.quad(lambda r: r * g.pdf_pairwise_distance(r, R), 0, 2 * R)
    assert mean == pytest.approx(128 * R / (45 * math.pi), rel=1e-9)
    assert g.mean_pairwise_distance(R) == pytest.approx(452.707, abs=1e-3)


def test_pairwise_pdf_matches_sampling():
    rng = g.rng_stream(8)
    R = 1.0
    d = g.distance(g.sample_uniform_disk(g.ORIGIN, R, rng, 400000),
                   g.sample_uniform_disk(g.ORIGIN, R, rng, 400000))
    cdf = lambda x: integrate.quad(g.pdf_pairwise_distance, 0, x, args=(R,))[0]
    for x in (0.3, 1.0, 1.6):
        assert np.mean(d <= x) == pytest.approx(cdf(x), abs=3e-3)


@settings(max_examples=60)
@given(st.floats(1e-3, 1.999))
def test_pairwise_pdf_non_negative_continuous(t):
    R = 7.0
    r = t * R
    v = g.pdf_pairwise_distance(r, R)
    assert v >= 0
    assert abs(g.pdf_pairwise_distance(r + 1e-9, R) - v) < 1e-6
    assert g.pdf_pairwise_distance(2 * R + 1, R) == 0.0


def test_conditional_mean_constants():
    assert g.conditional_mean_farthest(500.0) == pytest.approx(576.405, abs=1e-3)
    assert g.conditional_mean_farthest(1.0) == pytest.approx(1.152810, abs=1e-6)


def test_farthest_oracle_near_constant():
    est = g.farthest_mean_oracle(500.0, 2, 200000, g.rng_stream(9))
    assert est == pytest.approx(g.conditional_mean_farthest(500.0), rel=0.02)
