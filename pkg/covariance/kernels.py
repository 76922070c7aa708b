"""
Covariance Kernels
Lag-h covariance kernels, Bartlett lag window, the smoothed long-run kernel
and the rule-of-thumb bandwidth
"""

import math
from dataclasses import dataclass
from typing import Optional

import numpy as np

from fts.sample import FunctionalSample, Grid
from utils.errors import (
    BandwidthError,
    DimensionError,
    InsufficientDataError,
    LagRangeError,
    NumericError,
    ParameterError,
)
from utils.logger import get_logger

logger = get_logger(__name__)

CENTERING_TOLERANCE = 1e-10


@dataclass(frozen=True, eq=False)
class KernelMatrix:
    """
    Discretized bivariate kernel: values[i, j] = kernel(t_i, s_j)
    """

    grid: Grid
    values: np.ndarray

    def __post_init__(self):
        values = np.array(self.values, dtype=float, copy=True)
        m = self.grid.m
        if values.shape != (m, m):
            raise DimensionError(f"kernel values must be {m} x {m}, got {values.shape}")
        if not np.all(np.isfinite(values)):
            raise NumericError("kernel has non-finite entries")
        values.setflags(write=False)
        object.__setattr__(self, "values", values)

    @classmethod
    def from_function(cls, func, grid: Grid) -> "KernelMatrix":
        """Evaluate func(t, s) on the grid (func must broadcast)"""
        t, s = np.meshgrid(grid.points, grid.points, indexing="ij")
        return cls(grid=grid, values=func(t, s))

    @property
    def asymmetry(self) -> float:
        return float(np.max(np.abs(self.values - self.values.T)))

    def is_symmetric(self, tol: float = 1e-10) -> bool:
        return self.asymmetry <= tol

    def transpose(self) -> "KernelMatrix":
        return KernelMatrix(grid=self.grid, values=self.values.T)

    def __add__(self, other: "KernelMatrix") -> "KernelMatrix":
        if not self.grid.same_as(other.grid):
            raise DimensionError("cannot add kernels on different grids")
        return KernelMatrix(grid=self.grid, values=self.values + other.values)

    def __sub__(self, other: "KernelMatrix") -> "KernelMatrix":
        if not self.grid.same_as(other.grid):
            raise DimensionError("cannot subtract kernels on different grids")
        return KernelMatrix(grid=self.grid, values=self.values - other.values)


def _require_centered(sample: FunctionalSample):
    scale = max(1.0, float(np.max(np.abs(sample.values))))
    drift = float(np.max(np.abs(sample.values.mean(axis=0))))
    if drift > CENTERING_TOLERANCE * scale:
        raise ParameterError(
            f"sample must be centered (pointwise mean up to {drift:.3e}); call center() first"
        )


def lag_cov_kernel(sample: FunctionalSample, h: int) -> KernelMatrix:
    """
    Lag-h covariance kernel estimate

    For h >= 0: values[i, j] = (1/N) sum_{n=1}^{N-h} X_n(t_i) X_{n+h}(s_j).
    Negative lags mirror: lag_cov_kernel(-h) is the transpose of lag_cov_kernel(h).
    The sum is always divided by N.

    Args:
        sample: Centered functional sample
        h: Lag with |h| < N

    Returns:
        KernelMatrix on the sample grid
    """
    h = int(h)
    N = sample.n_curves
    if abs(h) >= N:
        raise LagRangeError(f"|h| must be < N = {N}, got h = {h}")
    _require_centered(sample)

    X = sample.values
    lag = abs(h)
    values = X[:N - lag].T @ X[lag:] / N
    if h < 0:
        values = values.T
    return KernelMatrix(grid=sample.grid, values=values)


def bartlett_weight(h: int, b: float) -> float:
    """Bartlett lag window max(0, 1 - |h|/b)"""
    if not b > 0:
        raise ParameterError(f"bandwidth must be positive, got {b}")
    return max(0.0, 1.0 - abs(h) / b)


def longrun_minus_lag0(
    sample: FunctionalSample,
    b: float,
    include_lag0: bool = False
) -> KernelMatrix:
    """
    Bartlett-smoothed long-run kernel without its lag-0 term

    c_b(t, s) = sum_{0 < |h| <= b} w(h, b) gamma_h(t, s), the kernel of the
    long-run operator minus the lag-0 covariance. With include_lag0 the lag-0
    kernel is added back, giving the full long-run kernel estimate.

    Args:
        sample: Centered functional sample
        b: Bandwidth, 0 < b < N
        include_lag0: Add gamma_0 to the result

    Returns:
        Symmetric KernelMatrix
    """
    N = sample.n_curves
    if not b > 0:
        raise ParameterError(f"bandwidth must be positive, got {b}")
    if b >= N:
        raise BandwidthError(f"bandwidth must be < N = {N}, got {b}")
    _require_centered(sample)

    X = sample.values
    m = sample.grid.m
    values = np.zeros((m, m))

    # Lags with zero weight are skipped; accumulation order is fixed
    h = 1
    while h < b and h < N:
        weight = bartlett_weight(h, b)
        gamma_h = X[:N - h].T @ X[h:] / N
        values += weight * (gamma_h + gamma_h.T)
        h += 1

    if include_lag0:
        values += X.T @ X / N

    # Exact symmetry up to the rounding of the transposed sum
    values = (values + values.T) / 2.0
    return KernelMatrix(grid=sample.grid, values=values)


def longrun_kernel(sample: FunctionalSample, b: float) -> KernelMatrix:
    """Full long-run kernel estimate (lag 0 included)"""
    return longrun_minus_lag0(sample, b, include_lag0=True)


def select_bandwidth(N: int, override: Optional[float] = None) -> float:
    """
    Bandwidth for the long-run kernel

    Args:
        N: Sample size (>= 4)
        override: User-supplied bandwidth, returned as is when given

    Returns:
        override, or the rule of thumb ceil(N^(1/3))
    """
    if override is not None:
        if not override > 0:
            raise ParameterError(f"bandwidth override must be positive, got {override}")
        return float(override)

    if N < 4:
        raise InsufficientDataError(f"bandwidth selection needs N >= 4, got {N}")

    root = float(np.cbrt(N))
    nearest = round(root)
    if nearest ** 3 == N:
        return float(nearest)
    return float(math.ceil(root))


def hilbert_schmidt_norm(kernel: KernelMatrix) -> float:
    """Quadrature Hilbert-Schmidt norm: sqrt of the double integral of k(t, s)^2"""
    w = kernel.grid.weights
    return float(np.sqrt(w @ (kernel.values ** 2) @ w))
