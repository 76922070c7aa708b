"""
Spectral Decomposition
Eigenpairs of discretized self-adjoint integral operators and the
cumulative-share truncation rule
"""

from dataclasses import dataclass

import numpy as np

from config import settings
from covariance.kernels import KernelMatrix, lag_cov_kernel
from fts.sample import FunctionalSample, Grid
from utils.errors import (
    ConditioningError,
    DegenerateCovarianceError,
    NumericError,
    ParameterError,
)
from utils.logger import get_logger

logger = get_logger(__name__)


@dataclass(frozen=True, eq=False)
class SpectralDecomposition:
    """
    Eigenvalues (descending) and quadrature-orthonormal eigenfunctions

    eigenfunctions[i] is the m-vector paired with eigenvalues[i]
    """

    grid: Grid
    eigenvalues: np.ndarray
    eigenfunctions: np.ndarray

    @property
    def n_positive(self) -> int:
        """Number of eigenvalues above the zero threshold"""
        return int(np.sum(self.eigenvalues > settings.ZERO_EIGENVALUE))

    def leading(self, k: int) -> np.ndarray:
        return self.eigenfunctions[:k]


def _fix_signs(curves: np.ndarray) -> np.ndarray:
    """Make the largest-magnitude entry of every row positive"""
    if curves.size == 0:
        return curves
    pivots = np.argmax(np.abs(curves), axis=1)
    signs = np.sign(curves[np.arange(curves.shape[0]), pivots])
    signs[signs == 0] = 1.0
    return curves * signs[:, np.newaxis]


def kernel_spectrum(kernel: KernelMatrix) -> SpectralDecomposition:
    """
    Eigendecomposition of the integral operator with a symmetric kernel

    The quadrature-weighted matrix W^(1/2) K W^(1/2) is decomposed with a
    symmetric solver; eigenfunctions are mapped back by W^(-1/2) so they are
    orthonormal under the grid inner product.

    Args:
        kernel: Symmetric KernelMatrix

    Returns:
        SpectralDecomposition with m eigenpairs
    """
    if not np.all(np.isfinite(kernel.values)):
        raise NumericError("kernel has non-finite entries")

    weights = kernel.grid.weights
    if np.any(weights <= 0):
        raise ConditioningError("spectral decomposition needs strictly positive quadrature weights")

    root_w = np.sqrt(weights)
    weighted = root_w[:, np.newaxis] * kernel.values * root_w[np.newaxis, :]
    weighted = (weighted + weighted.T) / 2.0

    eigenvalues, eigenvectors = np.linalg.eigh(weighted)
    order = np.argsort(eigenvalues)[::-1]
    eigenvalues = eigenvalues[order]
    eigenvectors = eigenvectors[:, order]

    # Clamp rounding-level values to zero
    scale = max(float(eigenvalues[0]), 0.0) if eigenvalues.size else 0.0
    clamp = (np.abs(eigenvalues) <= settings.CLAMP_EIGENVALUE) | (
        (eigenvalues < 0) & (eigenvalues >= -settings.ZERO_EIGENVALUE * scale)
    )
    if np.any(eigenvalues[~clamp] < 0):
        logger.debug(f"Kernel spectrum has negative eigenvalues down to {eigenvalues.min():.3e}")
    eigenvalues = np.where(clamp, 0.0, eigenvalues)

    eigenfunctions = _fix_signs((eigenvectors / root_w[:, np.newaxis]).T)

    return SpectralDecomposition(
        grid=kernel.grid,
        eigenvalues=eigenvalues,
        eigenfunctions=eigenfunctions,
    )


def cov0_spectrum(sample: FunctionalSample) -> SpectralDecomposition:
    """Spectrum of the lag-0 covariance operator of a centered sample"""
    return kernel_spectrum(lag_cov_kernel(sample, 0))


def select_p(
    spectrum: SpectralDecomposition,
    share: float = 0.90,
    p_max: int = 12
) -> int:
    """
    Truncation level from the cumulative eigenvalue share

    Args:
        spectrum: Spectrum of the lag-0 covariance operator
        share: Target share in (0, 1)
        p_max: Upper cap

    Returns:
        Smallest p whose leading eigenvalues carry at least `share` of the
        positive mass, capped at p_max and at the number of positive eigenvalues
    """
    if not 0.0 < share < 1.0:
        raise ParameterError(f"share must be in (0, 1), got {share}")
    if p_max < 1:
        raise ParameterError(f"p_max must be >= 1, got {p_max}")

    n_positive = spectrum.n_positive
    if n_positive == 0:
        raise DegenerateCovarianceError(
            "covariance operator has no eigenvalue above "
            f"{settings.ZERO_EIGENVALUE:g}; the centered sample is (numerically) zero"
        )

    positive = spectrum.eigenvalues[:n_positive]
    cumulative = np.cumsum(positive) / positive.sum()
    p = int(np.argmax(cumulative >= share - 1e-12)) + 1

    return min(p, p_max, n_positive)
