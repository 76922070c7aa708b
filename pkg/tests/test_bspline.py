import numpy as np
import pytest
from scipy import interpolate

from fts.bspline import (
    BSplineBasis,
    bspline_design,
    bspline_eval,
    rescale_points,
    smooth_to_sample,
)
from fts.sample import Grid
from utils.errors import ConditioningError, DomainError, ParameterError, UnderdeterminedFitError


def test_n_basis_counts_knots():
    basis = BSplineBasis(degree=3, interior_knots=[0.2, 0.5, 0.7])
    assert basis.n_basis == 7


def test_partition_of_unity_at_random_points():
    basis = BSplineBasis(degree=3, interior_knots=[0.2, 0.5, 0.7])
    rng = np.random.default_rng(1)
    points = np.concatenate([[0.0, 0.2, 0.5, 1.0], rng.uniform(0, 1, 1000)])
    design = bspline_design(basis, points)
    assert np.all(design >= 0)
    np.testing.assert_allclose(design.sum(axis=1), 1.0, atol=1e-12)


def test_bernstein_endpoint():
    basis = BSplineBasis(degree=3, interior_knots=[])
    np.testing.assert_allclose(bspline_eval(basis, 0.0), [1, 0, 0, 0], atol=1e-15)
    np.testing.assert_allclose(bspline_eval(basis, 1.0), [0, 0, 0, 1], atol=1e-15)


def test_bernstein_midpoint():
    basis = BSplineBasis(degree=3, interior_knots=[])
    np.testing.assert_allclose(bspline_eval(basis, 0.5), [0.125, 0.375, 0.375, 0.125], atol=1e-15)


@pytest.mark.parametrize("s", [-0.1, 1.1, np.nan])
def test_outside_domain(s):
    with pytest.raises(DomainError):
        bspline_eval(BSplineBasis(degree=3, interior_knots=[]), s)


def test_design_matches_unit_coefficient_splines():
    basis = BSplineBasis(degree=3, interior_knots=[0.1, 0.4, 0.4, 0.8])
    points = np.linspace(0.0, 1.0, 57)
    expected = np.column_stack([
        interpolate.BSpline(basis.knots, np.eye(basis.n_basis)[i], basis.degree)(points)
        for i in range(basis.n_basis)
    ])
    design = bspline_design(basis, points)
    np.testing.assert_allclose(design[:-1], expected[:-1], atol=1e-12)
    np.testing.assert_allclose(design[-1], np.eye(basis.n_basis)[-1], atol=1e-12)


def test_design_rejects_points_outside_domain():
    with pytest.raises(DomainError):
        bspline_design(BSplineBasis(degree=3, interior_knots=[0.5]), [0.2, 1.5])


def test_from_points_uses_quantiles():
    points = np.linspace(0, 1, 9)
    basis = BSplineBasis.from_points(points, n_basis=6, degree=3)
    np.testing.assert_allclose(basis.interior_knots, [1 / 3, 2 / 3])


def test_from_points_rejects_small_basis():
    with pytest.raises(ParameterError):
        BSplineBasis.from_points(np.linspace(0, 1, 9), n_basis=3, degree=3)


def test_cubic_polynomial_reproduced():
    points = np.linspace(0, 1, 8)
    cubic = lambda s: 1.0 - 2.0 * s + 0.5 * s ** 2 + 3.0 * s ** 3
    basis = BSplineBasis.from_points(points, n_basis=6)
    target = Grid.uniform(101)
    smoothed = smooth_to_sample(points, cubic(points)[np.newaxis, :], basis, target)
    np.testing.assert_allclose(smoothed.values[0], cubic(target.points), atol=1e-8)


def test_constant_row_reproduced():
    points = np.linspace(0, 1, 8)
    basis = BSplineBasis.from_points(points, n_basis=6)
    smoothed = smooth_to_sample(points, np.full((2, 8), 4.2), basis, Grid.uniform(51))
    np.testing.assert_allclose(smoothed.values, 4.2, atol=1e-10)


def test_noisy_sine_larger_basis_fits_better():
    rng = np.random.default_rng(5)
    points = np.linspace(0, 1, 50)
    observed = np.sin(2 * np.pi * points) + 0.1 * rng.standard_normal(50)
    grid = Grid(points)

    rss = {}
    for n_basis in (4, 15):
        basis = BSplineBasis.from_points(points, n_basis)
        fitted = smooth_to_sample(points, observed[np.newaxis, :], basis, grid).values[0]

        # Normal-equations solution on the same data
        design = bspline_design(basis, points)
        coefficients = np.linalg.solve(design.T @ design, design.T @ observed)
        np.testing.assert_allclose(fitted, design @ coefficients, atol=1e-8)
        rss[n_basis] = np.sum((observed - fitted) ** 2)

    assert rss[15] < rss[4]


def test_underdetermined_fit():
    points = np.linspace(0, 1, 5)
    basis = BSplineBasis.from_points(points, n_basis=6)
    with pytest.raises(UnderdeterminedFitError):
        smooth_to_sample(points, np.zeros((1, 5)), basis, Grid.uniform(11))


def test_rank_deficient_design():
    basis = BSplineBasis(degree=3, interior_knots=[0.3, 0.5, 0.7])
    points = np.linspace(0, 0.2, 10)
    with pytest.raises(ConditioningError):
        smooth_to_sample(points, np.zeros((1, 10)), basis, Grid.uniform(11))


class TestRescalePoints:
    def test_calendar(self):
        np.testing.assert_allclose(rescale_points([0.25, 0.5, 10.0]), [0.0, 0.25 / 9.75, 1.0])

    def test_rank(self):
        np.testing.assert_allclose(rescale_points([0.25, 0.5, 10.0], spacing="rank"), [0.0, 0.5, 1.0])

    def test_invalid(self):
        with pytest.raises(ParameterError):
            rescale_points([1.0, 2.0], spacing="log")
        with pytest.raises(ParameterError):
            rescale_points([2.0, 1.0])
