"""
Factor Loadings
Loading curves from the whitened target operator, quadrature Gram-Schmidt,
factor scores and the residual series
"""

from dataclasses import dataclass
from typing import Optional, Sequence

import numpy as np

from covariance.lambda_operator import LambdaOperator
from fts.sample import FunctionalSample, Grid, inner_products
from utils.errors import ConditioningError, DimensionError, ParameterError
from utils.logger import get_logger

logger = get_logger(__name__)

NONSTATIONARY = "nonstationary"
STATIONARY = "stationary"
BLOCK_LABELS = (NONSTATIONARY, STATIONARY)

# Relative norm below which a Gram-Schmidt candidate counts as dependent
DEPENDENCE_TOLERANCE = 1e-8


@dataclass(frozen=True, eq=False)
class LoadingSet:
    """
    Orthonormal loading curves

    curves[k] is loading k on grid; block_labels[k] tags it nonstationary or
    stationary; eigenvalues[k] is the signed target-operator eigenvalue
    (lag-0 eigenvalue for PCA loadings). Nonstationary rows come first.
    """

    grid: Grid
    curves: np.ndarray
    block_labels: tuple
    eigenvalues: np.ndarray

    def __post_init__(self):
        curves = np.array(self.curves, dtype=float, copy=True).reshape(-1, self.grid.m)
        eigenvalues = np.array(self.eigenvalues, dtype=float, copy=True).ravel()
        labels = tuple(self.block_labels)

        if not (curves.shape[0] == eigenvalues.size == len(labels)):
            raise DimensionError("curves, eigenvalues and block_labels must have equal length")
        unknown = set(labels) - set(BLOCK_LABELS)
        if unknown:
            raise ParameterError(f"unknown block labels: {sorted(unknown)}")
        if NONSTATIONARY in labels[labels.count(NONSTATIONARY):]:
            raise ParameterError("nonstationary loadings must precede stationary ones")

        curves.setflags(write=False)
        eigenvalues.setflags(write=False)
        object.__setattr__(self, "curves", curves)
        object.__setattr__(self, "eigenvalues", eigenvalues)
        object.__setattr__(self, "block_labels", labels)

    @classmethod
    def empty(cls, grid: Grid) -> "LoadingSet":
        return cls(grid=grid, curves=np.empty((0, grid.m)), block_labels=(), eigenvalues=np.empty(0))

    @property
    def n_loadings(self) -> int:
        return self.curves.shape[0]

    def head(self, k: int) -> "LoadingSet":
        return LoadingSet(
            grid=self.grid,
            curves=self.curves[:k],
            block_labels=self.block_labels[:k],
            eigenvalues=self.eigenvalues[:k],
        )

    def block(self, label: str) -> "LoadingSet":
        rows = [i for i, tag in enumerate(self.block_labels) if tag == label]
        return LoadingSet(
            grid=self.grid,
            curves=self.curves[rows],
            block_labels=tuple(label for _ in rows),
            eigenvalues=self.eigenvalues[rows],
        )

    def concat(self, other: "LoadingSet") -> "LoadingSet":
        if not self.grid.same_as(other.grid):
            raise DimensionError("cannot concatenate loadings on different grids")
        return LoadingSet(
            grid=self.grid,
            curves=np.vstack([self.curves, other.curves]),
            block_labels=self.block_labels + other.block_labels,
            eigenvalues=np.concatenate([self.eigenvalues, other.eigenvalues]),
        )

    def gram(self) -> np.ndarray:
        """Quadrature Gram matrix of the loadings (identity when orthonormal)"""
        return inner_products(self.curves, self.curves, self.grid)


def orthonormalize(
    curves,
    grid: Grid,
    against: Optional[np.ndarray] = None
) -> np.ndarray:
    """
    Quadrature Gram-Schmidt in row order

    Every row is projected off the rows of `against` (assumed orthonormal) and
    off the rows already processed, twice for stability. The sign of each
    result is fixed so its largest-magnitude entry is positive.

    Args:
        curves: K x m candidate curves
        grid: Quadrature grid
        against: Optional J x m orthonormal curves to orthogonalize against

    Returns:
        K x m orthonormal curves
    """
    curves = np.atleast_2d(np.asarray(curves, dtype=float))
    if curves.shape[1] != grid.m:
        raise DimensionError(f"curves have {curves.shape[1]} points, grid has {grid.m}")

    basis = [] if against is None else [row for row in np.atleast_2d(against) if row.size]
    n_fixed = len(basis)
    w = grid.weights

    for index, curve in enumerate(curves):
        start_norm = np.sqrt(np.sum(w * curve * curve))
        vector = curve.copy()
        for _ in range(2):
            for q in basis:
                vector -= np.sum(w * vector * q) * q

        length = np.sqrt(np.sum(w * vector * vector))
        if start_norm == 0.0 or length <= DEPENDENCE_TOLERANCE * start_norm:
            raise ConditioningError(
                f"curve {index} is linearly dependent on the preceding loadings"
            )

        vector = vector / length
        pivot = np.argmax(np.abs(vector))
        if vector[pivot] < 0:
            vector = -vector
        basis.append(vector)

    return np.array(basis[n_fixed:]).reshape(-1, grid.m)


def extract_loadings(
    op: LambdaOperator,
    k0: int,
    order: str = "magnitude",
    label: str = STATIONARY
) -> LoadingSet:
    """
    Candidate loadings from the whitened target operator

    Step 1: eigenpairs (alpha_i, w_i) of S, sorted by |alpha| ("magnitude")
            or by signed alpha ("signed"), both descending
    Step 2: map back to curves: zeta_i = score_basis^T D^(1/2) w_i
    Step 3: Gram-Schmidt in that order

    Args:
        op: LambdaOperator
        k0: Number of candidates (<= p)
        order: "magnitude" or "signed"
        label: Block label attached to every curve

    Returns:
        LoadingSet with k0 curves and their signed eigenvalues
    """
    if k0 < 1 or k0 > op.p:
        raise ParameterError(f"k0 must be in [1, p = {op.p}], got {k0}")
    if order not in ("magnitude", "signed"):
        raise ParameterError(f"order must be 'magnitude' or 'signed', got '{order}'")

    if not np.any(op.S):
        # Zero operator: keep the score basis order
        alphas = np.zeros(op.p)
        vectors = np.eye(op.p)
    else:
        alphas, vectors = np.linalg.eigh(op.S)
        key = np.abs(alphas) if order == "magnitude" else alphas
        ranking = np.argsort(-key, kind="stable")
        alphas = alphas[ranking]
        vectors = vectors[:, ranking]

    candidates = (vectors[:, :k0] * np.sqrt(op.d)[:, np.newaxis]).T @ op.score_basis
    curves = orthonormalize(candidates, op.grid)

    return LoadingSet(
        grid=op.grid,
        curves=curves,
        block_labels=tuple(label for _ in range(k0)),
        eigenvalues=alphas[:k0],
    )


def factor_scores(sample: FunctionalSample, loadings: LoadingSet) -> np.ndarray:
    """
    Factor trajectories by quadrature projection

    Args:
        sample: Functional sample (same grid as the loadings)
        loadings: LoadingSet

    Returns:
        N x K matrix with entry (n, k) = <X_n, loading_k>
    """
    if not sample.grid.same_as(loadings.grid):
        raise DimensionError("sample and loadings live on different grids")
    if loadings.n_loadings == 0:
        return np.zeros((sample.n_curves, 0))
    return inner_products(sample.values, loadings.curves, sample.grid)


def residual_series(
    sample: FunctionalSample,
    nonstat_loadings: LoadingSet,
    scores: np.ndarray
) -> FunctionalSample:
    """
    Remove the nonstationary component: Z_n = X_n - sum_k f_{n,k} loading_k

    Args:
        sample: Functional sample the scores were computed from
        nonstat_loadings: r loadings
        scores: N x r scores of sample against nonstat_loadings

    Returns:
        Residual sample Z (uncentered)
    """
    if not sample.grid.same_as(nonstat_loadings.grid):
        raise DimensionError("sample and loadings live on different grids")

    scores = np.asarray(scores, dtype=float).reshape(sample.n_curves, -1)
    if scores.shape[1] != nonstat_loadings.n_loadings:
        raise DimensionError(
            f"scores have {scores.shape[1]} columns for {nonstat_loadings.n_loadings} loadings"
        )

    if nonstat_loadings.n_loadings == 0:
        return FunctionalSample(grid=sample.grid, values=sample.values)
    return FunctionalSample(
        grid=sample.grid,
        values=sample.values - scores @ nonstat_loadings.curves,
    )


def align_signs(curves: np.ndarray, reference: np.ndarray, grid: Grid) -> np.ndarray:
    """Flip rows of curves whose inner product with the matching reference row is negative"""
    products = np.sum(curves * reference * grid.weights, axis=1)
    signs = np.where(products < 0, -1.0, 1.0)
    return curves * signs[:, np.newaxis]


def loadings_from_curves(
    curves: Sequence,
    grid: Grid,
    eigenvalues: Sequence[float],
    label: str
) -> LoadingSet:
    """Wrap already orthonormal curves as a single-block LoadingSet"""
    curves = np.asarray(curves, dtype=float).reshape(-1, grid.m)
    return LoadingSet(
        grid=grid,
        curves=curves,
        block_labels=tuple(label for _ in range(curves.shape[0])),
        eigenvalues=np.asarray(eigenvalues, dtype=float),
    )
