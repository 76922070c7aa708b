"""
Functional Linear Processes
Moving-average processes Y_n = sum_j A_j eps_{n-j} with operators held as
discretized action matrices, and their analytic long-run kernel
"""

from dataclasses import dataclass
from typing import Sequence

import numpy as np

from covariance.kernels import KernelMatrix
from fts.sample import FunctionalSample, Grid
from simlab.generators import SeedLike, as_generator
from utils.errors import DimensionError, ParameterError


def integral_operator(kernel: KernelMatrix) -> np.ndarray:
    """Action matrix of the integral operator with this kernel: (Af)(t_i) = sum_j k_ij w_j f_j"""
    return kernel.values * kernel.grid.weights[np.newaxis, :]


def identity_operator(grid: Grid) -> np.ndarray:
    return np.eye(grid.m)


@dataclass(frozen=True, eq=False)
class LinearProcessSpec:
    """
    operators[j] is the m x m action matrix of A_j; innovation_cov is the
    covariance kernel of the Gaussian innovations
    """

    grid: Grid
    operators: tuple
    innovation_cov: KernelMatrix

    def __post_init__(self):
        operators = tuple(np.array(A, dtype=float) for A in self.operators)
        if not operators:
            raise ParameterError("a linear process needs at least one operator")
        for j, A in enumerate(operators):
            if A.shape != (self.grid.m, self.grid.m):
                raise DimensionError(f"operator {j} has shape {A.shape}, expected {self.grid.m} x {self.grid.m}")
        if not self.innovation_cov.grid.same_as(self.grid):
            raise DimensionError("innovation covariance lives on a different grid")
        object.__setattr__(self, "operators", operators)

    @property
    def order(self) -> int:
        return len(self.operators) - 1


def linear_process_longrun(spec: LinearProcessSpec) -> KernelMatrix:
    """
    Analytic long-run kernel A G A^T with A = sum_j A_j

    For action matrices the operator A Gamma A* has action A G A^T W, so its
    kernel is A G A^T.

    Args:
        spec: LinearProcessSpec

    Returns:
        KernelMatrix of the long-run covariance operator
    """
    A = np.sum(spec.operators, axis=0)
    values = A @ spec.innovation_cov.values @ A.T
    return KernelMatrix(grid=spec.grid, values=(values + values.T) / 2.0)


def simulate_linear_process(
    spec: LinearProcessSpec,
    N: int,
    seed: SeedLike = None
) -> FunctionalSample:
    """
    Simulate N curves of the moving-average process

    Innovations are Gaussian curves with pointwise covariance innovation_cov;
    the first `order` innovations only feed the lags of the first curves.

    Args:
        spec: LinearProcessSpec
        N: Number of curves
        seed: Seed, SeedSequence or Generator

    Returns:
        Uncentered FunctionalSample
    """
    if N < 1:
        raise ParameterError(f"N must be >= 1, got {N}")

    rng = as_generator(seed)
    eigenvalues, eigenvectors = np.linalg.eigh(spec.innovation_cov.values)
    root = eigenvectors * np.sqrt(np.clip(eigenvalues, 0.0, None))

    q = spec.order
    innovations = rng.standard_normal((N + q, spec.grid.m)) @ root.T

    values = np.zeros((N, spec.grid.m))
    for j, A in enumerate(spec.operators):
        values += innovations[q - j:q - j + N] @ A.T
    return FunctionalSample(grid=spec.grid, values=values)
