"""
Loading Metrics
Sign-aligned integrated squared error and greedy loading matching
"""

import numpy as np

from fts.sample import Grid, inner_products, norm
from utils.errors import DimensionError, ParameterError


def _unit(curve, grid: Grid, name: str) -> np.ndarray:
    curve = np.asarray(curve, dtype=float)
    length = norm(curve, grid)
    if length == 0.0:
        raise ParameterError(f"{name} has zero norm")
    return curve / length


def ise(true_loading, est_loading, grid: Grid) -> float:
    """
    Integrated squared error after normalization and sign alignment

    Args:
        true_loading: m-vector
        est_loading: m-vector
        grid: Quadrature grid

    Returns:
        min over sign of the integral of (lambda - sign * lambda_hat)^2
    """
    truth = _unit(true_loading, grid, "true_loading")
    estimate = _unit(est_loading, grid, "est_loading")
    plus = np.sum(grid.weights * (truth - estimate) ** 2)
    minus = np.sum(grid.weights * (truth + estimate) ** 2)
    return float(min(plus, minus))


def match_loadings(true_loadings, est_loadings, grid: Grid) -> np.ndarray:
    """
    Greedy one-to-one matching by largest |<lambda_hat, lambda>|

    Args:
        true_loadings: K x m
        est_loadings: J x m
        grid: Quadrature grid

    Returns:
        K-vector; entry k is the estimated row matched to true row k, or -1
    """
    truth = np.atleast_2d(np.asarray(true_loadings, dtype=float))
    estimates = np.atleast_2d(np.asarray(est_loadings, dtype=float))
    if estimates.size == 0:
        return np.full(truth.shape[0], -1, dtype=int)
    if truth.shape[1] != estimates.shape[1]:
        raise DimensionError("true and estimated loadings have different lengths")

    truth = np.array([_unit(row, grid, "true loading") for row in truth])
    estimates = np.array([_unit(row, grid, "estimated loading") for row in estimates])
    affinity = np.abs(inner_products(truth, estimates, grid))

    assignment = np.full(truth.shape[0], -1, dtype=int)
    for _ in range(min(affinity.shape)):
        k, j = np.unravel_index(np.argmax(affinity), affinity.shape)
        assignment[k] = j
        affinity[k, :] = -np.inf
        affinity[:, j] = -np.inf
    return assignment
