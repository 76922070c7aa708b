import numpy as np
import pytest

from covariance.kernels import KernelMatrix, hilbert_schmidt_norm, longrun_kernel, select_bandwidth
from fts.sample import Grid, center
from simlab.linear_process import (
    LinearProcessSpec,
    identity_operator,
    integral_operator,
    linear_process_longrun,
    simulate_linear_process,
)
from utils.errors import DimensionError, ParameterError


@pytest.fixture
def grid21():
    return Grid.uniform(21)


@pytest.fixture
def innovation_cov(grid21):
    return KernelMatrix.from_function(lambda t, s: np.minimum(t, s) + 0.1, grid21)


def rank_two_operator(grid):
    s = grid.points
    u = np.vstack([np.sqrt(2) * np.sin(2 * np.pi * s), np.sqrt(2) * np.cos(2 * np.pi * s)])
    kernel = KernelMatrix(grid=grid, values=0.6 * np.outer(u[0], u[0]) - 0.3 * np.outer(u[1], u[1]))
    return kernel


def composed_longrun(grid, a_kernel, G):
    """Kernel of (I + A) G (I + A)* by explicit double quadrature"""
    m, w = grid.m, grid.weights
    out = np.zeros((m, m))
    for t in range(m):
        for s in range(m):
            value = G[t, s]
            for u in range(m):
                value += w[u] * a_kernel[t, u] * G[u, s]
                value += w[u] * G[t, u] * a_kernel[s, u]
                for v in range(m):
                    value += w[u] * w[v] * a_kernel[t, u] * G[u, v] * a_kernel[s, v]
            out[t, s] = value
    return out


def test_identity_only(grid21, innovation_cov):
    spec = LinearProcessSpec(grid=grid21, operators=(identity_operator(grid21),), innovation_cov=innovation_cov)
    np.testing.assert_allclose(linear_process_longrun(spec).values, innovation_cov.values, atol=1e-14)


def test_unit_moving_average(grid21, innovation_cov):
    identity = identity_operator(grid21)
    spec = LinearProcessSpec(grid=grid21, operators=(identity, identity), innovation_cov=innovation_cov)
    np.testing.assert_allclose(linear_process_longrun(spec).values, 4 * innovation_cov.values, atol=1e-13)


def test_rank_two_operator_matches_composition(grid21, innovation_cov):
    a_kernel = rank_two_operator(grid21)
    spec = LinearProcessSpec(
        grid=grid21,
        operators=(identity_operator(grid21), integral_operator(a_kernel)),
        innovation_cov=innovation_cov,
    )
    expected = composed_longrun(grid21, a_kernel.values, innovation_cov.values)
    np.testing.assert_allclose(linear_process_longrun(spec).values, expected, atol=1e-8)


def test_simulated_innovation_covariance(grid21, innovation_cov):
    spec = LinearProcessSpec(grid=grid21, operators=(identity_operator(grid21),), innovation_cov=innovation_cov)
    sample = simulate_linear_process(spec, N=20_000, seed=1)
    empirical = sample.values.T @ sample.values / sample.n_curves
    assert np.max(np.abs(empirical - innovation_cov.values)) <= 0.05


def test_simulation_reproducible(grid21, innovation_cov):
    identity = identity_operator(grid21)
    spec = LinearProcessSpec(grid=grid21, operators=(identity, 0.5 * identity), innovation_cov=innovation_cov)
    a = simulate_linear_process(spec, N=30, seed=4)
    b = simulate_linear_process(spec, N=30, seed=4)
    assert a.values.shape == (30, 21)
    np.testing.assert_array_equal(a.values, b.values)


def test_validation(grid21, innovation_cov):
    with pytest.raises(ParameterError):
        LinearProcessSpec(grid=grid21, operators=(), innovation_cov=innovation_cov)
    with pytest.raises(DimensionError):
        LinearProcessSpec(grid=grid21, operators=(np.eye(3),), innovation_cov=innovation_cov)
    with pytest.raises(DimensionError):
        LinearProcessSpec(grid=Grid.uniform(11), operators=(np.eye(11),), innovation_cov=innovation_cov)


@pytest.mark.slow
def test_longrun_estimate_converges(grid21, innovation_cov):
    spec = LinearProcessSpec(
        grid=grid21,
        operators=(identity_operator(grid21), integral_operator(rank_two_operator(grid21))),
        innovation_cov=innovation_cov,
    )
    truth = linear_process_longrun(spec)

    def error(N, seed):
        sample = center(simulate_linear_process(spec, N, seed=seed))
        estimate = longrun_kernel(sample, select_bandwidth(N))
        return hilbert_schmidt_norm(estimate - truth)

    small = np.mean([error(500, seed) for seed in range(20)])
    large = np.mean([error(2000, 100 + seed) for seed in range(20)])
    assert 0.2 < large / small < 0.8

    wins = sum(error(2000, 200 + seed) < error(200, 300 + seed) for seed in range(50))
    assert wins >= 45
