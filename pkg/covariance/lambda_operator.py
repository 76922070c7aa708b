"""
Target Operator
Whitened p x p representation of (long-run - lag-0) times the inverse of the
lag-0 covariance, restricted to the span of the leading covariance eigenfunctions
"""

from dataclasses import dataclass
from typing import Optional

import numpy as np

from config import settings
from covariance.kernels import KernelMatrix, lag_cov_kernel, longrun_minus_lag0
from covariance.spectral import SpectralDecomposition, kernel_spectrum
from fts.sample import FunctionalSample, Grid
from utils.errors import DimensionError, IllConditionedInverseError, ParameterError
from utils.logger import get_logger

logger = get_logger(__name__)


@dataclass(frozen=True, eq=False)
class LambdaOperator:
    """
    Target operator in score coordinates

    score_basis: p x m leading eigenfunctions of the lag-0 covariance
    d: their eigenvalues (all positive)
    C: projection of the long-run-minus-lag-0 kernel onto score_basis
    S: whitened matrix D^(-1/2) C D^(-1/2); shares its eigenvalues with C D^(-1)
    """

    grid: Grid
    p: int
    score_basis: np.ndarray
    d: np.ndarray
    C: np.ndarray
    S: np.ndarray


def build_lambda_from_kernels(
    gamma0: KernelMatrix,
    c_b: KernelMatrix,
    p: int,
    spectrum: Optional[SpectralDecomposition] = None
) -> LambdaOperator:
    """
    Project and whiten a long-run-minus-lag-0 kernel

    Args:
        gamma0: Lag-0 covariance kernel
        c_b: Long-run kernel without the lag-0 term
        p: Truncation level
        spectrum: Precomputed spectrum of gamma0 (computed when omitted)

    Returns:
        LambdaOperator of size p
    """
    if not gamma0.grid.same_as(c_b.grid):
        raise DimensionError("gamma0 and c_b live on different grids")
    if p < 1:
        raise ParameterError(f"p must be >= 1, got {p}")

    if spectrum is None:
        spectrum = kernel_spectrum(gamma0)
    if p > spectrum.eigenvalues.size:
        raise ParameterError(f"p = {p} exceeds the grid size {spectrum.eigenvalues.size}")

    d = spectrum.eigenvalues[:p].copy()
    if np.any(d <= settings.ZERO_EIGENVALUE):
        raise IllConditionedInverseError(
            f"lag-0 eigenvalues {d.min():.3e} too small to invert at p = {p}"
        )

    basis = spectrum.eigenfunctions[:p].copy()
    weighted_basis = basis * gamma0.grid.weights

    C = weighted_basis @ c_b.values @ weighted_basis.T
    C = (C + C.T) / 2.0

    inv_root_d = 1.0 / np.sqrt(d)
    S = inv_root_d[:, np.newaxis] * C * inv_root_d[np.newaxis, :]
    S = (S + S.T) / 2.0

    return LambdaOperator(grid=gamma0.grid, p=p, score_basis=basis, d=d, C=C, S=S)


def build_lambda(
    sample: FunctionalSample,
    b: float,
    p: int,
    spectrum: Optional[SpectralDecomposition] = None
) -> LambdaOperator:
    """
    Estimate the target operator from a centered sample

    Args:
        sample: Centered functional sample
        b: Bandwidth of the Bartlett window
        p: Truncation level (<= number of positive lag-0 eigenvalues)
        spectrum: Precomputed lag-0 spectrum of the same sample

    Returns:
        LambdaOperator
    """
    gamma0 = lag_cov_kernel(sample, 0)
    c_b = longrun_minus_lag0(sample, b)
    op = build_lambda_from_kernels(gamma0, c_b, p, spectrum=spectrum)
    logger.debug(f"Built target operator: b={b:g}, p={p}, trace(S)={np.trace(op.S):.4f}")
    return op
