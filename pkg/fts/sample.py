"""
Functional Samples
Curves sampled on a shared quadrature grid over [0, 1], trapezoidal
inner products, centering and first differences
"""

from dataclasses import dataclass, field, replace
from typing import Optional, Sequence

import numpy as np

from utils.errors import DimensionError, InsufficientDataError, ParameterError


def _trapezoid_weights(points: np.ndarray) -> np.ndarray:
    """Trapezoidal quadrature weights for (possibly non-uniform) points"""
    gaps = np.diff(points)
    weights = np.zeros_like(points)
    weights[:-1] += gaps / 2.0
    weights[1:] += gaps / 2.0
    return weights


@dataclass(frozen=True, eq=False)
class Grid:
    """
    Quadrature grid on [0, 1]

    points are strictly increasing with points[0] = 0 and points[-1] = 1;
    weights are trapezoidal and sum to the length of the domain (1)
    """

    points: np.ndarray
    weights: np.ndarray = field(default=None)

    def __post_init__(self):
        points = np.asarray(self.points, dtype=float)
        if points.ndim != 1 or points.size < 3:
            raise ParameterError(f"Grid needs at least 3 points, got {points.size}")
        if not np.all(np.diff(points) > 0):
            raise ParameterError("Grid points must be strictly increasing")
        if abs(points[0]) > 1e-12 or abs(points[-1] - 1.0) > 1e-12:
            raise ParameterError("Grid must start at 0 and end at 1")

        # Pin the end points exactly
        points = points.copy()
        points[0], points[-1] = 0.0, 1.0

        weights = self.weights
        if weights is None:
            weights = _trapezoid_weights(points)
        weights = np.asarray(weights, dtype=float)
        if weights.shape != points.shape or np.any(weights < 0):
            raise ParameterError("Grid weights must be nonnegative, one per point")
        if abs(weights.sum() - 1.0) > 1e-12:
            raise ParameterError(f"Grid weights must sum to 1, got {weights.sum()!r}")

        points.setflags(write=False)
        weights.setflags(write=False)
        object.__setattr__(self, "points", points)
        object.__setattr__(self, "weights", weights)

    @classmethod
    def uniform(cls, m: int = 101) -> "Grid":
        """Uniform grid with m points (default 101)"""
        if m < 3:
            raise ParameterError(f"Grid needs at least 3 points, got {m}")
        return cls(np.linspace(0.0, 1.0, m))

    @property
    def m(self) -> int:
        return self.points.size

    @property
    def is_uniform(self) -> bool:
        gaps = np.diff(self.points)
        return bool(np.allclose(gaps, gaps[0], rtol=1e-9, atol=0.0))

    def same_as(self, other: "Grid") -> bool:
        return self is other or (
            self.m == other.m and np.array_equal(self.points, other.points)
        )

    def __eq__(self, other) -> bool:
        return isinstance(other, Grid) and self.same_as(other)

    def __hash__(self) -> int:
        return hash((self.m, self.points.tobytes()))


@dataclass(frozen=True, eq=False)
class FunctionalSample:
    """
    N curves evaluated on a shared grid

    values[n] is curve X_{n+1} on grid.points. When centered is True,
    mean_curve holds the pointwise mean that was subtracted
    """

    grid: Grid
    values: np.ndarray
    centered: bool = False
    mean_curve: Optional[np.ndarray] = None

    def __post_init__(self):
        values = np.array(self.values, dtype=float, copy=True)
        if values.ndim == 1:
            values = values[np.newaxis, :]
        if values.ndim != 2 or values.shape[1] != self.grid.m:
            raise DimensionError(
                f"values must be N x {self.grid.m}, got shape {np.shape(self.values)}"
            )
        values.setflags(write=False)
        object.__setattr__(self, "values", values)

        if self.mean_curve is not None:
            mean_curve = np.array(self.mean_curve, dtype=float, copy=True)
            if mean_curve.shape != (self.grid.m,):
                raise DimensionError("mean_curve must have one value per grid point")
            mean_curve.setflags(write=False)
            object.__setattr__(self, "mean_curve", mean_curve)

    @classmethod
    def from_values(cls, values, grid: Grid = None) -> "FunctionalSample":
        """Wrap an N x m matrix; a uniform grid is built when none is given"""
        values = np.asarray(values, dtype=float)
        if grid is None:
            grid = Grid.uniform(values.shape[-1])
        return cls(grid=grid, values=values)

    @property
    def n_curves(self) -> int:
        return self.values.shape[0]

    def subset(self, rows) -> "FunctionalSample":
        return replace(self, values=self.values[rows])


def _check_vector(f, grid: Grid, name: str) -> np.ndarray:
    f = np.asarray(f, dtype=float)
    if f.shape[-1] != grid.m:
        raise DimensionError(f"{name} has {f.shape[-1]} values, grid has {grid.m} points")
    return f


def inner_product(f, g, grid: Grid) -> float:
    """
    Trapezoidal approximation of the L2 inner product on [0, 1]

    Args:
        f: m-vector evaluated on grid
        g: m-vector evaluated on grid
        grid: Quadrature grid

    Returns:
        Approximation of the integral of f(s) g(s) ds
    """
    f = _check_vector(f, grid, "f")
    g = _check_vector(g, grid, "g")
    if f.ndim != 1 or g.ndim != 1:
        raise DimensionError("inner_product expects two m-vectors")
    return float(np.sum(grid.weights * f * g))


def norm(f, grid: Grid) -> float:
    """Quadrature L2 norm of an m-vector"""
    return float(np.sqrt(max(inner_product(f, f, grid), 0.0)))


def inner_products(values, curves, grid: Grid) -> np.ndarray:
    """
    All pairwise inner products between the rows of two matrices

    Args:
        values: N x m matrix
        curves: K x m matrix

    Returns:
        N x K matrix of quadrature inner products
    """
    values = _check_vector(values, grid, "values")
    curves = _check_vector(curves, grid, "curves")
    return np.atleast_2d(values) @ (np.atleast_2d(curves) * grid.weights).T


def center(sample: FunctionalSample) -> FunctionalSample:
    """
    Subtract the pointwise sample mean

    Applying center to an already centered sample leaves the values unchanged
    and keeps the originally recorded mean curve.

    Args:
        sample: Functional sample with N >= 2 curves

    Returns:
        Centered sample with mean_curve recorded and centered=True
    """
    if sample.n_curves < 2:
        raise InsufficientDataError(f"center needs N >= 2 curves, got {sample.n_curves}")

    mean_curve = sample.values.mean(axis=0)
    values = sample.values - mean_curve

    if sample.centered and sample.mean_curve is not None:
        mean_curve = sample.mean_curve + mean_curve

    return FunctionalSample(grid=sample.grid, values=values, centered=True, mean_curve=mean_curve)


def difference(sample: FunctionalSample) -> FunctionalSample:
    """
    First differences: row n of the result is X_{n+1} - X_n

    Args:
        sample: Functional sample with N >= 2 curves

    Returns:
        Uncentered sample with N - 1 curves
    """
    if sample.n_curves < 2:
        raise InsufficientDataError(f"difference needs N >= 2 curves, got {sample.n_curves}")
    return FunctionalSample(grid=sample.grid, values=np.diff(sample.values, axis=0))


def cumulative_sum(sample: FunctionalSample, initial: Optional[Sequence[float]] = None) -> FunctionalSample:
    """
    Partial sums of the curves; difference(cumulative_sum(Y)) equals Y without its first row

    Args:
        sample: Functional sample
        initial: Optional starting curve added to every partial sum

    Returns:
        Uncentered sample of the same size
    """
    values = np.cumsum(sample.values, axis=0)
    if initial is not None:
        values = values + _check_vector(initial, sample.grid, "initial")
    return FunctionalSample(grid=sample.grid, values=values)
