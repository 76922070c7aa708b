"""
B-spline Smoothing
Clamped B-spline bases on [0, 1] (scipy design matrices) and per-curve
least-squares smoothing of discretely observed curves onto a grid
"""

from dataclasses import dataclass
from typing import Sequence

import numpy as np
from scipy import interpolate

from fts.sample import FunctionalSample, Grid
from utils.errors import (
    ConditioningError,
    DimensionError,
    DomainError,
    ParameterError,
    UnderdeterminedFitError,
)
from utils.logger import get_logger

logger = get_logger(__name__)


@dataclass(frozen=True, eq=False)
class BSplineBasis:
    """Clamped B-spline basis on [0, 1] with the given interior knots"""

    degree: int
    interior_knots: np.ndarray

    def __post_init__(self):
        if self.degree < 0:
            raise ParameterError(f"degree must be >= 0, got {self.degree}")
        knots = np.asarray(self.interior_knots, dtype=float).ravel()
        if knots.size and (knots.min() <= 0.0 or knots.max() >= 1.0):
            raise ParameterError("interior knots must lie strictly inside (0, 1)")
        if np.any(np.diff(knots) < 0):
            raise ParameterError("interior knots must be nondecreasing")
        knots.setflags(write=False)
        object.__setattr__(self, "interior_knots", knots)

    @classmethod
    def from_points(cls, points: Sequence[float], n_basis: int, degree: int = 3) -> "BSplineBasis":
        """
        Basis with interior knots at equally spaced quantiles of the observation points

        Args:
            points: Observation points in [0, 1]
            n_basis: Number of basis functions (>= degree + 1)
            degree: Spline degree (3 for cubic)
        """
        n_interior = n_basis - degree - 1
        if n_interior < 0:
            raise ParameterError(f"n_basis must be >= degree + 1 = {degree + 1}, got {n_basis}")
        levels = np.arange(1, n_interior + 1) / (n_interior + 1)
        knots = np.quantile(np.asarray(points, dtype=float), levels) if n_interior else np.empty(0)
        return cls(degree=degree, interior_knots=knots)

    @property
    def n_basis(self) -> int:
        return self.interior_knots.size + self.degree + 1

    @property
    def knots(self) -> np.ndarray:
        """Full clamped knot vector"""
        return np.concatenate([
            np.zeros(self.degree + 1),
            self.interior_knots,
            np.ones(self.degree + 1),
        ])


def bspline_design(basis: BSplineBasis, points: Sequence[float]) -> np.ndarray:
    """
    len(points) x n_basis design matrix

    Args:
        basis: B-spline basis
        points: Points in [0, 1]

    Returns:
        Dense design matrix; every row is nonnegative and sums to one
    """
    points = np.atleast_1d(np.asarray(points, dtype=float)).ravel()
    if not np.all(np.isfinite(points)) or np.any((points < 0.0) | (points > 1.0)):
        raise DomainError("evaluation points must lie in [0, 1]")
    return interpolate.BSpline.design_matrix(points, basis.knots, basis.degree).toarray()


def bspline_eval(basis: BSplineBasis, s: float) -> np.ndarray:
    """Every basis function at the single point s"""
    s = float(s)
    if not 0.0 <= s <= 1.0 or not np.isfinite(s):
        raise DomainError(f"s must lie in [0, 1], got {s}")
    return bspline_design(basis, [s])[0]


def smooth_to_sample(
    obs_points: Sequence[float],
    obs_values,
    basis: BSplineBasis,
    target_grid: Grid
) -> FunctionalSample:
    """
    Least-squares B-spline fit of every row, evaluated on the target grid

    Rows that lie in the span of the basis are reproduced exactly.

    Args:
        obs_points: q observation points in [0, 1]
        obs_values: N x q matrix of observations
        basis: B-spline basis with n_basis <= q
        target_grid: Grid the smoothed curves are evaluated on

    Returns:
        Uncentered FunctionalSample on target_grid
    """
    obs_points = np.asarray(obs_points, dtype=float).ravel()
    obs_values = np.atleast_2d(np.asarray(obs_values, dtype=float))
    q = obs_points.size

    if obs_values.shape[1] != q:
        raise DimensionError(f"obs_values has {obs_values.shape[1]} columns, expected {q}")
    if q < basis.n_basis:
        raise UnderdeterminedFitError(
            f"{q} observation points cannot determine {basis.n_basis} basis coefficients"
        )

    design = bspline_design(basis, obs_points)
    rank = np.linalg.matrix_rank(design)
    if rank < basis.n_basis:
        raise ConditioningError(
            f"B-spline design matrix is rank deficient ({rank} < {basis.n_basis}); "
            "check knot placement against the observation points"
        )

    coefficients, _, _, _ = np.linalg.lstsq(design, obs_values.T, rcond=None)
    curves = (bspline_design(basis, target_grid.points) @ coefficients).T

    logger.debug(f"Smoothed {obs_values.shape[0]} curves with {basis.n_basis} basis functions")
    return FunctionalSample(grid=target_grid, values=curves)


def rescale_points(points: Sequence[float], spacing: str = "calendar") -> np.ndarray:
    """
    Map observation points (e.g. maturities) affinely onto [0, 1]

    Args:
        points: Increasing observation points
        spacing: "calendar" keeps relative distances, "rank" spaces points evenly

    Returns:
        Rescaled points with first 0 and last 1
    """
    points = np.asarray(points, dtype=float).ravel()
    if points.size < 2 or not np.all(np.diff(points) > 0):
        raise ParameterError("observation points must be strictly increasing (at least 2)")

    if spacing == "rank":
        return np.linspace(0.0, 1.0, points.size)
    if spacing != "calendar":
        raise ParameterError(f"spacing must be 'calendar' or 'rank', got '{spacing}'")

    scaled = (points - points[0]) / (points[-1] - points[0])
    scaled[0], scaled[-1] = 0.0, 1.0
    return scaled
