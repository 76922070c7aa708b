import numpy as np
import pytest

from fts.sample import Grid, inner_products
from simlab.generators import (
    YIELD_MATURITIES,
    gen_ar1,
    gen_bm_noise,
    gen_i1,
    load_model_catalogue,
    make_yield_fixture,
    simulate_model,
    yield_loadings,
)
from utils.errors import ParameterError


class TestAr1:
    def test_white_noise_variance(self):
        path = gen_ar1(100_000, 0.0, seed=1)
        assert 0.97 <= path.var() <= 1.03

    def test_lag_one_autocorrelation(self):
        path = gen_ar1(100_000, 0.7, seed=2)
        centered = path - path.mean()
        rho = np.sum(centered[1:] * centered[:-1]) / np.sum(centered ** 2)
        assert 0.69 <= rho <= 0.71

    def test_reproducible(self):
        np.testing.assert_array_equal(gen_ar1(50, 0.3, seed=7), gen_ar1(50, 0.3, seed=7))

    @pytest.mark.parametrize("a", [1.0, -1.2])
    def test_explosive_coefficient(self, a):
        with pytest.raises(ParameterError):
            gen_ar1(10, a, seed=0)


class TestI1:
    def test_increments_are_the_ar_path(self):
        increments = gen_ar1(200, 0.5, seed=3)
        path = gen_i1(200, 0.5, seed=3)
        assert path[0] == increments[0]
        np.testing.assert_allclose(np.diff(path), increments[1:], atol=1e-12)

    def test_random_walk_variance_grows_linearly(self):
        N = 50
        paths = np.array([gen_i1(N, 0.0, seed=seed) for seed in range(2000)])
        variance = paths.var(axis=0)
        slope = np.polyfit(np.arange(1, N + 1), variance, 1)[0]
        assert 0.9 <= slope <= 1.1

    def test_explosive_coefficient(self):
        with pytest.raises(ParameterError):
            gen_i1(10, 1.0, seed=0)


class TestBrownianNoise:
    def test_covariance(self):
        grid = Grid.uniform(101)
        paths = gen_bm_noise(10_000, grid, seed=4).values
        np.testing.assert_array_equal(paths[:, 0], 0.0)
        assert 0.95 <= paths[:, -1].var() <= 1.05
        covariance = np.mean(paths[:, 25] * paths[:, 75])
        assert 0.22 <= covariance <= 0.28

    def test_non_uniform_grid(self):
        with pytest.raises(ParameterError):
            gen_bm_noise(10, Grid([0.0, 0.1, 0.5, 1.0]), seed=0)


class TestSimulateModel:
    def test_catalogue(self):
        catalogue = load_model_catalogue()
        assert sorted(catalogue) == [1, 2, 3, 4]
        assert [f["kind"] for f in catalogue[4]["factors"]] == ["i1", "ar1"]

    def test_noiseless_model_lies_in_loading_span(self):
        draw = simulate_model(2, N=40, m=51, seed=5, noise_scale=0.0)
        np.testing.assert_allclose(draw.sample.values, draw.factors @ draw.loadings, atol=1e-12)
        assert draw.loadings.shape == (2, 51)
        assert draw.n_nonstationary == 0

    def test_nonstationary_count(self):
        assert simulate_model(3, N=30, seed=0).n_nonstationary == 1
        assert simulate_model(4, N=30, seed=0).n_nonstationary == 1

    def test_reproducible(self):
        a = simulate_model(4, N=60, m=21, seed=9)
        b = simulate_model(4, N=60, m=21, seed=9)
        np.testing.assert_array_equal(a.sample.values, b.sample.values)
        np.testing.assert_array_equal(a.factors, b.factors)

    def test_factors_drawn_before_noise(self):
        rng = np.random.default_rng(11)
        factor = gen_ar1(30, 0.7, rng)
        noise = gen_bm_noise(30, Grid.uniform(21), rng).values
        draw = simulate_model(1, N=30, m=21, seed=11)
        np.testing.assert_array_equal(draw.factors[:, 0], factor)
        np.testing.assert_allclose(draw.sample.values, np.outer(factor, draw.loadings[0]) + noise)

    @pytest.mark.parametrize("model_id", [0, 9])
    def test_unknown_model(self, model_id):
        with pytest.raises(ParameterError):
            simulate_model(model_id, N=10)

    def test_negative_noise_scale(self):
        with pytest.raises(ParameterError):
            simulate_model(1, N=10, noise_scale=-1.0)


class TestYieldFixture:
    def test_shape_and_maturities(self):
        fixture = make_yield_fixture()
        assert fixture.values.shape == (366, 8)
        np.testing.assert_array_equal(fixture.maturities, YIELD_MATURITIES)

    def test_reproducible(self):
        np.testing.assert_array_equal(make_yield_fixture(seed=3).values, make_yield_fixture(seed=3).values)

    def test_loadings_orthonormal(self):
        grid = Grid.uniform(201)
        curves = yield_loadings(grid.points)
        np.testing.assert_allclose(inner_products(curves, curves, grid), np.eye(3), atol=1e-3)
