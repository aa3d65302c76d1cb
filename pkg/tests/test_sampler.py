import math

import numpy as np
import pytest
from scipy import stats

from ringgas import count_in_disk_stats, expected_count, radial_histogram, sample, sample_many
from ringgas.errors import ConfigError, DomainError
from ringgas.kernel import DiagonalProfile, mean_level_spacing
from ringgas.sampler import LayerSampler, PointConfiguration, spacing_from_samples


@pytest.fixture(scope="module")
def cubic_configs(cubic):
    return sample_many(cubic, 500, 400, seed=11)


def test_single_point_ginibre(ginibre):
    configs = sample_many(ginibre, 1, 100_000, seed=1)
    sq = np.array([abs(c.points[0]) ** 2 for c in configs])
    assert abs(sq.mean() - 1.0) < 4 / math.sqrt(sq.size)
    assert stats.kstest(sq, "expon").pvalue > 1e-3


def test_ginibre_layers_are_gamma(ginibre):
    n, j = 20, 5
    configs = sample_many(ginibre, n, 3000, seed=2)
    scaled = np.array([n * abs(c.points[j]) ** 2 for c in configs])
    assert stats.kstest(scaled, stats.gamma(j + 1).cdf).pvalue > 1e-3


def test_ginibre_points_inside_disk(ginibre):
    configs = sample_many(ginibre, 100, 50, seed=3)
    frac = np.mean([np.mean(np.abs(c.points) <= 1.0) for c in configs])
    assert frac >= 0.9


def test_determinism_and_batching(cubic):
    a = sample(cubic, 80, seed=7, sample_id=3)
    b = sample(cubic, 80, seed=7, sample_id=3)
    np.testing.assert_array_equal(a.points, b.points)
    assert not np.array_equal(a.points, sample(cubic, 80, seed=8, sample_id=3).points)
    many = sample_many(cubic, 80, 10, seed=7, batch_points=200)
    threaded = sample_many(cubic, 80, 10, seed=7, threads=4, batch_points=200)
    np.testing.assert_array_equal(many[3].points, a.points)
    for x, y in zip(many, threaded):
        np.testing.assert_array_equal(x.points, y.points)
        assert x.sample_id == y.sample_id


def test_layer_cdf_inversion(cubic):
    layers = LayerSampler(cubic, 300)
    rng = np.random.default_rng(0)
    u = rng.random(300)
    r = layers.invert(u)
    assert np.max(np.abs(layers.cdf(np.arange(300), r) - u)) <= 1e-8


def test_layer_cdf_matches_samples(cubic):
    n, j = 60, 20
    layers = LayerSampler(cubic, n)
    configs = sample_many(cubic, n, 2000, seed=4, layers=layers)
    radii = np.array([abs(c.points[j]) for c in configs])
    assert stats.kstest(radii, lambda r: layers.cdf(j, r)).pvalue > 1e-3


def test_sample_rejects_mismatched_layers(cubic):
    layers = LayerSampler(cubic, 10)
    with pytest.raises(ConfigError):
        sample(cubic, 11, seed=0, layers=layers)
    with pytest.raises(DomainError):
        LayerSampler(cubic, 0)


def test_count_statistics_edge_cases(ginibre):
    assert count_in_disk_stats(ginibre, 50, 0, 0.0, 100, seed=5).mean == 0.0
    full = count_in_disk_stats(ginibre, 50, 0, 10.0, 100, seed=5)
    assert full.mean == 50.0 and full.stderr == 0.0
    with pytest.raises(ConfigError):
        count_in_disk_stats(ginibre, 50, 0, 1.0, 99, seed=5)
    with pytest.raises(DomainError):
        count_in_disk_stats(ginibre, 50, 0, -1.0, 100, seed=5)


def test_counts_match_quadrature(cubic, crit, cubic_configs):
    n = 500
    s_n = mean_level_spacing(cubic, crit, n).s
    profile = DiagonalProfile(cubic, n)
    for f in (0.5, 1.0, 2.0):
        st = count_in_disk_stats(cubic, n, crit.r_star, f * s_n, 400, seed=11, configs=cubic_configs)
        exact = expected_count(cubic, n, crit.r_star, f * s_n, profile=profile)
        assert abs(st.mean - exact) < 4 * st.stderr


def test_spacing_from_samples(cubic, crit, cubic_configs):
    s_n = mean_level_spacing(cubic, crit, 500).s
    est = spacing_from_samples(cubic_configs, crit.r_star, np.linspace(0.3 * s_n, 2 * s_n, 171))
    assert abs(est.s_hat - s_n) < 4 * est.stderr + 0.01 * s_n
    with pytest.raises(ConfigError):
        spacing_from_samples([], 0, [0.1])


def test_histogram_matches_density(cubic, cubic_configs, crit):
    edges = np.linspace(0.2, 1.6, 15)
    hist = radial_histogram(cubic_configs, edges)
    mids = 0.5 * (edges[1:] + edges[:-1])
    exact = DiagonalProfile(cubic, 500).density(mids) / math.pi
    # bins are narrow compared with the density scale away from the edge
    inner = mids < 1.5
    z = (hist.density[inner] - exact[inner]) / hist.density_errors[inner]
    assert np.max(np.abs(z)) < 5
    # the density dips at the critical ring
    k = int(np.argmin(np.abs(mids - crit.r_star)))
    assert hist.density[k] < hist.density[0] and hist.density[k] < hist.density[-3]


def test_ginibre_histogram_is_flat(ginibre):
    configs = sample_many(ginibre, 100, 200, seed=9)
    hist = radial_histogram(configs, np.linspace(0.0, 0.8, 9))
    z = (hist.density - 100 / math.pi) / hist.density_errors
    assert np.max(np.abs(z)) < 5


def test_histogram_validation(ginibre):
    c1 = PointConfiguration(3, np.zeros(3, complex), 0)
    c2 = PointConfiguration(4, np.zeros(4, complex), 0)
    with pytest.raises(ConfigError):
        radial_histogram([], [0, 1])
    with pytest.raises(ConfigError):
        radial_histogram([c1, c2], [0, 1])
    with pytest.raises(DomainError):
        radial_histogram([c1], [0, 2, 1])
    with pytest.raises(DomainError):
        radial_histogram([c1], [-1, 1])
