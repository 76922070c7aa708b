"""
Monte Carlo acceptance checks (run with --runslow)
"""

import numpy as np
import pytest

from config import settings
from factor_model.diagnostics import independence_test, scalar_stationarity_test, stationarity_test
from factor_model.estimators import fit_nonstationary, fit_stationary
from fts.sample import Grid, FunctionalSample, inner_products
from fts.bspline import BSplineBasis, rescale_points, smooth_to_sample
from simlab.generators import gen_ar1, gen_bm_noise, make_yield_fixture, simulate_model
from simlab.harness import SimConfig, run_monte_carlo
from simlab.metrics import ise

pytestmark = pytest.mark.slow


def simulate_table(model_id, N, reps, seed=7, k_rules=("ratio",), level_refine=False):
    config = SimConfig(model_id=model_id, N=N, reps=reps, master_seed=seed, k_rules=list(k_rules),
                       level_refine=level_refine)
    table = run_monte_carlo(config, progress=False).table()
    assert (table["error"] == "").all()
    return table


@pytest.mark.parametrize("model_id, n_loadings", [(1, 1), (3, 1), (4, 2)])
def test_fdf_beats_pca(model_id, n_loadings):
    table = simulate_table(model_id, N=300, reps=200)
    for k in range(1, n_loadings + 1):
        assert table[f"ise_fdf_{k}"].median() < table[f"ise_pca_{k}"].median()


def test_model2_within_factor_two_of_pca():
    table = simulate_table(2, N=300, reps=200)
    assert table["ise_fdf_2"].median() <= 2.0 * table["ise_pca_2"].median()


def test_ise_decreases_with_sample_size():
    medians = [simulate_table(1, N=N, reps=100)["ise_fdf_1"].median() for N in (200, 500, 1000)]
    assert medians[0] > medians[1] > medians[2]


def test_factor_count_shares():
    model1 = simulate_table(1, N=300, reps=200)
    assert (model1["k_hat_ratio"] == 1).mean() >= 0.95

    model3 = simulate_table(3, N=300, reps=200)
    assert (model3["r_hat_ratio"] == 1).mean() >= 0.90

    model4 = simulate_table(4, N=300, reps=200)
    assert (model4["r_hat_ratio"] == 1).mean() >= 0.90
    assert (model4["k_hat_ratio"] > model4["r_hat_ratio"]).mean() >= 0.90


def test_level_refined_factor_count_shares():
    model3 = simulate_table(3, N=300, reps=200, level_refine=True)
    assert (model3["k_hat_ratio"] == 1).mean() >= 0.90

    model4 = simulate_table(4, N=300, reps=200, level_refine=True)
    correct = (model4["r_hat_ratio"] == 1) & (model4["k_hat_ratio"] - model4["r_hat_ratio"] == 1)
    assert correct.mean() >= 0.80


def test_loading_space_consistency():
    wins = 0
    for rep in range(100):
        small = simulate_model(1, N=200, seed=10_000 + rep)
        large = simulate_model(1, N=1000, seed=20_000 + rep)
        error_small = ise(small.loadings[0], fit_stationary(small.sample, n_factors=1).loadings.curves[0],
                          small.sample.grid)
        error_large = ise(large.loadings[0], fit_stationary(large.sample, n_factors=1).loadings.curves[0],
                          large.sample.grid)
        wins += error_large < error_small
    assert wins >= 90


def test_integrated_factor_scores():
    level_rejects = 0
    increment_rejects = 0
    for rep in range(100):
        draw = simulate_model(3, N=500, seed=30_000 + rep)
        fit = fit_nonstationary(draw.sample, n_nonstationary=1, n_factors=1)
        scores = fit.factors[:, 0]
        level_rejects += scalar_stationarity_test(scores, mc_reps=1000, seed=rep).p_value < 0.05
        increment_rejects += scalar_stationarity_test(np.diff(scores), mc_reps=1000, seed=rep).p_value < 0.05
    assert level_rejects >= 90
    assert increment_rejects <= 10


def test_pretest_sizes():
    grid = Grid.uniform(51)
    independence = 0
    stationarity = 0
    for rep in range(500):
        noise = gen_bm_noise(500, grid, seed=40_000 + rep)
        independence += independence_test(noise).rejects(0.05)
        stationarity += stationarity_test(noise, mc_reps=1000, seed=rep).rejects(0.05)
    assert 0.02 <= independence / 500 <= 0.09
    assert 0.02 <= stationarity / 500 <= 0.09


def test_pretest_power():
    grid = Grid.uniform(51)
    sin = np.sin(2 * np.pi * grid.points)
    independence = 0
    stationarity = 0
    for rep in range(200):
        rng = np.random.default_rng(50_000 + rep)
        factor = gen_ar1(500, 0.8, rng)
        sample = FunctionalSample(grid=grid, values=np.outer(factor, sin) + gen_bm_noise(500, grid, rng).values)
        independence += independence_test(sample).p_value < 0.01

        walk = FunctionalSample(grid=grid, values=np.cumsum(gen_bm_noise(366, grid, rng).values, axis=0))
        stationarity += stationarity_test(walk, mc_reps=1000, seed=rep).p_value <= 0.01
    assert independence >= 198
    assert stationarity >= 190


def test_model3_stationarity_power():
    rejects = sum(
        stationarity_test(simulate_model(3, N=500, seed=60_000 + rep).sample, mc_reps=1000, seed=rep).rejects(0.05)
        for rep in range(100)
    )
    assert rejects >= 90


def sign_changes(curve):
    signs = np.sign(curve[np.abs(curve) > 1e-3 * np.max(np.abs(curve))])
    return int(np.sum(signs[1:] != signs[:-1]))


def test_yield_panel_shapes():
    fixture = make_yield_fixture()
    points = rescale_points(fixture.maturities, "calendar")
    basis = BSplineBasis.from_points(points, n_basis=8)
    sample = smooth_to_sample(points, fixture.values, basis, Grid.uniform(settings.GRID_SIZE))

    assert stationarity_test(sample, mc_reps=1000).p_value < 0.05

    fit = fit_nonstationary(sample, k0=8, n_nonstationary=1, n_factors=3)
    assert (fit.r_hat, fit.K_hat) == (1, 3)
    np.testing.assert_allclose(inner_products(fit.loadings.curves, fit.loadings.curves, fit.grid),
                               np.eye(3), atol=1e-8)
    assert [sign_changes(curve) for curve in fit.loadings.curves] == [0, 1, 2]
