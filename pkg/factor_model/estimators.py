"""
FDF Estimators
Stationary and nonstationary functional dynamic factor fits, the
functional-PCA baseline and curve reconstruction
"""

from dataclasses import dataclass, field
from typing import Dict, List, Optional

import numpy as np

from config import settings
from covariance.kernels import select_bandwidth
from covariance.lambda_operator import build_lambda
from covariance.spectral import cov0_spectrum, select_p
from factor_model.diagnostics import TestRecord, independence_test
from factor_model.factor_count import check_k_rule, estimate_k_all
from factor_model.loadings import (
    NONSTATIONARY,
    STATIONARY,
    LoadingSet,
    align_signs,
    extract_loadings,
    factor_scores,
    loadings_from_curves,
    orthonormalize,
    residual_series,
)
from fts.sample import FunctionalSample, Grid, center, difference
from utils.errors import ConditioningError, InsufficientDataError, ParameterError
from utils.logger import get_logger

logger = get_logger(__name__)

MIN_CURVES_STATIONARY = 20
MIN_CURVES_NONSTATIONARY = 30


@dataclass
class FdfFit:
    """
    Fitted factor model

    factors[:, k] holds <X_n - mean_curve, loading_k>. eigenvalues_all maps a
    block label to the retained candidate eigenvalues of that block.
    """

    mode: str
    loadings: LoadingSet
    factors: np.ndarray
    K_hat: int
    r_hat: int
    bandwidth: Optional[float]
    p: int
    k0: int
    eigenvalues_all: Dict[str, np.ndarray]
    mean_curve: np.ndarray
    diagnostics: dict = field(default_factory=dict)
    estimator: str = "fdf"
    k_rule: str = "ratio"

    @property
    def grid(self) -> Grid:
        return self.loadings.grid

    @property
    def n_curves(self) -> int:
        return self.factors.shape[0]


@dataclass
class BlockFit:
    """One eigen-extraction step (stationary sample, DeltaX or Z)"""

    loadings: LoadingSet
    candidates: LoadingSet
    k_by_rule: Dict[str, int]
    k_hat: int
    bandwidth: Optional[float]
    p: int
    k0_eff: int
    low_signal: bool

    def info(self) -> dict:
        return {
            "bandwidth": self.bandwidth,
            "p": self.p,
            "k0": self.k0_eff,
            "k_hat": self.k_hat,
            "low_signal": self.low_signal,
        }


def _new_diagnostics() -> dict:
    return {
        "stationarity": None,
        "independence": None,
        "low_signal": False,
        "warnings": [],
        "k_hat_by_rule": {},
        "blocks": {},
    }


def _warn(diagnostics: dict, message: str):
    logger.warning(message)
    diagnostics["warnings"].append(message)


def _fit_block(
    centered: FunctionalSample,
    method: str,
    k0: int,
    b: Optional[float],
    p_share: float,
    p_max: int,
    k_rule: str,
    forced: Optional[int],
    order: str,
    label: str
) -> BlockFit:
    """
    Candidate loadings and factor count for one centered sample

    method "fdf" extracts from the whitened target operator, "pca" takes the
    lag-0 eigenfunctions. A forced count replaces the rule outcome and raises
    the truncation level when needed.
    """
    spectrum = cov0_spectrum(centered)
    p = select_p(spectrum, p_share, p_max)
    n_positive = spectrum.n_positive

    if forced is not None:
        if forced < 0:
            raise ParameterError(f"forced factor count must be >= 0, got {forced}")
        if forced > n_positive:
            raise ParameterError(
                f"cannot extract {forced} loadings: only {n_positive} positive covariance eigenvalues"
            )
        p = max(p, forced)

    if method == "fdf":
        k0_eff = min(k0, p)
        n_candidates = max(k0_eff, forced or 0)
        bandwidth = select_bandwidth(centered.n_curves, b)
        op = build_lambda(centered, bandwidth, p, spectrum=spectrum)
        candidates = extract_loadings(op, n_candidates, order=order, label=label)
        alphas = candidates.eigenvalues
        if order == "signed":
            # Only positive eigenvalues mark integrated directions
            rule_input = np.clip(alphas, 0.0, None)
            top = float(alphas[0])
        else:
            rule_input = alphas
            top = float(np.max(np.abs(alphas)))
        low_signal = top < settings.LOW_SIGNAL_THRESHOLD
    elif method == "pca":
        k0_eff = min(k0, n_positive)
        n_candidates = max(k0_eff, forced or 0)
        bandwidth = None
        candidates = loadings_from_curves(
            spectrum.leading(n_candidates),
            centered.grid,
            spectrum.eigenvalues[:n_candidates],
            label,
        )
        rule_input = candidates.eigenvalues
        low_signal = False
    else:
        raise ParameterError(f"method must be 'fdf' or 'pca', got '{method}'")

    k_by_rule = estimate_k_all(rule_input[:k0_eff], k0_eff)
    k_hat = forced if forced is not None else k_by_rule[k_rule]

    logger.info(
        f"[{label}/{method}] b={bandwidth}, p={p}, k0={k0_eff}, "
        f"rules={k_by_rule}, K={k_hat}" + (" (forced)" if forced is not None else "")
    )

    return BlockFit(
        loadings=candidates.head(k_hat),
        candidates=candidates,
        k_by_rule=k_by_rule,
        k_hat=k_hat,
        bandwidth=bandwidth,
        p=p,
        k0_eff=k0_eff,
        low_signal=low_signal,
    )


def _record_block(diagnostics: dict, eigenvalues_all: dict, block: BlockFit, label: str):
    diagnostics["blocks"][label] = block.info()
    diagnostics["k_hat_by_rule"][label] = dict(block.k_by_rule)
    eigenvalues_all[label] = np.array(block.candidates.eigenvalues[:block.k0_eff])


def _low_signal_message(label: str) -> str:
    return (
        f"{label} block: largest candidate eigenvalue below "
        f"{settings.LOW_SIGNAL_THRESHOLD:g}; factor count may be spurious"
    )


def _fit_stationary_pipeline(
    sample: FunctionalSample,
    method: str,
    k0: int,
    b: Optional[float],
    p_share: float,
    p_max: int,
    k_rule: str,
    n_factors: Optional[int]
) -> FdfFit:
    if sample.n_curves < MIN_CURVES_STATIONARY:
        raise InsufficientDataError(
            f"stationary fit needs N >= {MIN_CURVES_STATIONARY}, got {sample.n_curves}"
        )
    if k0 < 2:
        raise ParameterError(f"k0 must be >= 2, got {k0}")
    check_k_rule(k_rule)

    diagnostics = _new_diagnostics()
    eigenvalues_all = {}

    centered = center(sample)
    block = _fit_block(
        centered, method, k0, b, p_share, p_max, k_rule,
        forced=n_factors, order="magnitude", label=STATIONARY,
    )
    _record_block(diagnostics, eigenvalues_all, block, STATIONARY)

    if block.low_signal:
        diagnostics["low_signal"] = True
        _warn(diagnostics, _low_signal_message(STATIONARY))

    factors = factor_scores(centered, block.loadings)

    return FdfFit(
        mode="stationary",
        loadings=block.loadings,
        factors=factors,
        K_hat=block.k_hat,
        r_hat=0,
        bandwidth=block.bandwidth,
        p=block.p,
        k0=k0,
        eigenvalues_all=eigenvalues_all,
        mean_curve=np.array(centered.mean_curve),
        diagnostics=diagnostics,
        estimator=method,
        k_rule=k_rule,
    )


def _fit_nonstationary_pipeline(
    sample: FunctionalSample,
    method: str,
    k0: int,
    b: Optional[float],
    p_share: float,
    p_max: int,
    k_rule: str,
    alpha_gate: float,
    n_nonstationary: Optional[int],
    n_factors: Optional[int],
    level_refine: bool,
    independence_lags: int,
    proj_dim: int
) -> FdfFit:
    if sample.n_curves < MIN_CURVES_NONSTATIONARY:
        raise InsufficientDataError(
            f"nonstationary fit needs N >= {MIN_CURVES_NONSTATIONARY}, got {sample.n_curves}"
        )
    if k0 < 2:
        raise ParameterError(f"k0 must be >= 2, got {k0}")
    if not 0.0 < alpha_gate < 1.0:
        raise ParameterError(f"alpha_gate must be in (0, 1), got {alpha_gate}")
    if n_factors is not None and n_nonstationary is not None and n_factors < n_nonstationary:
        raise ParameterError("n_factors must be >= n_nonstationary")
    check_k_rule(k_rule)

    diagnostics = _new_diagnostics()
    eigenvalues_all = {}
    grid = sample.grid

    # Step 1: integrated directions from the differenced series
    level = center(sample)
    increments = center(difference(sample))
    order = "signed" if method == "fdf" else "magnitude"
    nonstat_block = _fit_block(
        increments, method, k0, b, p_share, p_max, k_rule,
        forced=n_nonstationary, order=order, label=NONSTATIONARY,
    )
    _record_block(diagnostics, eigenvalues_all, nonstat_block, NONSTATIONARY)
    r_hat = nonstat_block.k_hat

    if nonstat_block.low_signal:
        diagnostics["low_signal"] = True
        _warn(diagnostics, _low_signal_message(NONSTATIONARY))
    if n_nonstationary is None and r_hat == nonstat_block.k0_eff:
        _warn(diagnostics, f"r_hat = k0 = {r_hat}; k0 may be too small")

    xi = nonstat_block.loadings
    if level_refine and r_hat > 0:
        level_spectrum = cov0_spectrum(level)
        if level_spectrum.n_positive < r_hat:
            raise ConditioningError(
                f"level covariance has {level_spectrum.n_positive} positive eigenvalues, need {r_hat}"
            )
        refined = align_signs(level_spectrum.leading(r_hat), xi.curves, grid)
        xi = loadings_from_curves(refined, grid, xi.eigenvalues, NONSTATIONARY)

    # Step 2-3: level scores and the residual series
    level_scores = factor_scores(level, xi)
    residual = residual_series(level, xi, level_scores)

    # Step 4: independence gate on the residual series
    level_mass = float(np.sum(level.values ** 2 * grid.weights))
    residual_mass = float(np.sum(residual.values ** 2 * grid.weights))
    if residual_mass <= settings.ZERO_EIGENVALUE * max(level_mass, 1.0):
        _warn(diagnostics, "residual series is numerically zero; no stationary block")
    else:
        independence = independence_test(residual, H=independence_lags, proj_dim=proj_dim)
        diagnostics["independence"] = independence
        logger.info(
            f"Independence gate: Q={independence.statistic:.3f}, p={independence.p_value:.4f} "
            f"({'rejected' if independence.rejects(alpha_gate) else 'not rejected'} at {alpha_gate})"
        )

    if n_factors is not None:
        n_stationary = n_factors - r_hat
        if n_stationary < 0:
            raise ParameterError(f"n_factors = {n_factors} is below r_hat = {r_hat}")
        fit_stationary_block = n_stationary > 0
        forced_stationary = n_stationary
    else:
        gate = diagnostics["independence"]
        fit_stationary_block = gate is not None and gate.rejects(alpha_gate)
        forced_stationary = None

    # Step 5: stationary block from the residual series
    stationary_loadings = LoadingSet.empty(grid)
    if fit_stationary_block:
        stat_block = _fit_block(
            center(residual), method, k0, b, p_share, p_max, k_rule,
            forced=forced_stationary, order="magnitude", label=STATIONARY,
        )
        _record_block(diagnostics, eigenvalues_all, stat_block, STATIONARY)
        if stat_block.low_signal:
            _warn(diagnostics, _low_signal_message(STATIONARY))

        block_loadings = stat_block.loadings
        if n_factors is None and r_hat + block_loadings.n_loadings > k0:
            n_keep = max(k0 - r_hat, 0)
            _warn(
                diagnostics,
                f"r_hat + stationary count = {r_hat + block_loadings.n_loadings} exceeds "
                f"k0 = {k0}; keeping {n_keep} stationary loadings"
            )
            block_loadings = block_loadings.head(n_keep)

        if block_loadings.n_loadings > 0:
            upsilon = orthonormalize(block_loadings.curves, grid, against=xi.curves)
            stationary_loadings = loadings_from_curves(
                upsilon, grid, block_loadings.eigenvalues, STATIONARY
            )

    loadings = xi.concat(stationary_loadings)
    factors = factor_scores(level, loadings)

    logger.info(f"Nonstationary fit ({method}): r_hat={r_hat}, K_hat={loadings.n_loadings}")

    return FdfFit(
        mode="nonstationary",
        loadings=loadings,
        factors=factors,
        K_hat=loadings.n_loadings,
        r_hat=r_hat,
        bandwidth=nonstat_block.bandwidth,
        p=nonstat_block.p,
        k0=k0,
        eigenvalues_all=eigenvalues_all,
        mean_curve=np.array(level.mean_curve),
        diagnostics=diagnostics,
        estimator=method,
        k_rule=k_rule,
    )


def fit_stationary(
    sample: FunctionalSample,
    k0: int = settings.K0,
    b: Optional[float] = None,
    p_share: float = settings.P_SHARE,
    k_rule: str = "ratio",
    p_max: int = settings.P_MAX,
    n_factors: Optional[int] = None
) -> FdfFit:
    """
    Stationary FDF fit

    Step 1: center the sample
    Step 2: pick the bandwidth and truncation level
    Step 3: build the whitened target operator and extract k0 candidates
    Step 4: count factors with k_rule (or take n_factors) and keep that many
    Step 5: score the centered sample

    Args:
        sample: Functional sample (N >= 20)
        k0: Number of candidate loadings (>= 2)
        b: Bandwidth override
        p_share: Cumulative-share target for the truncation level
        k_rule: "ratio", "scree" or "scree_literal"
        p_max: Cap on the truncation level
        n_factors: Known factor count; bypasses the rule

    Returns:
        FdfFit in stationary mode
    """
    return _fit_stationary_pipeline(sample, "fdf", k0, b, p_share, p_max, k_rule, n_factors)


def fit_nonstationary(
    sample: FunctionalSample,
    k0: int = settings.K0,
    b: Optional[float] = None,
    p_share: float = settings.P_SHARE,
    k_rule: str = "ratio",
    alpha_gate: float = settings.ALPHA_GATE,
    p_max: int = settings.P_MAX,
    n_nonstationary: Optional[int] = None,
    n_factors: Optional[int] = None,
    level_refine: bool = False,
    independence_lags: int = settings.INDEPENDENCE_LAGS,
    proj_dim: int = settings.PROJECTION_DIM
) -> FdfFit:
    """
    Nonstationary FDF fit

    The integrated directions come from the differenced series (signed
    eigenvalue order), the level sample is scored against them, and the
    residual series goes through the independence gate. A rejected gate
    adds a stationary block fitted on the residuals and orthogonalized
    against the integrated block. Without forced counts K_hat is capped
    at k0.

    Args:
        sample: Functional sample (N >= 30)
        k0: Number of candidate loadings per block
        b: Bandwidth override
        p_share: Cumulative-share target for the truncation level
        k_rule: "ratio", "scree" or "scree_literal"
        alpha_gate: Level of the independence gate
        p_max: Cap on the truncation level
        n_nonstationary: Known number of integrated factors
        n_factors: Known total factor count
        level_refine: Opt-in variant; replace the integrated loadings with
                      the leading level-covariance eigenfunctions
        independence_lags: Lag horizon of the gate
        proj_dim: Projection dimension of the gate

    Returns:
        FdfFit in nonstationary mode
    """
    return _fit_nonstationary_pipeline(
        sample, "fdf", k0, b, p_share, p_max, k_rule, alpha_gate,
        n_nonstationary, n_factors, level_refine, independence_lags, proj_dim,
    )


def fit_pca_baseline(
    sample: FunctionalSample,
    K: Optional[int] = None,
    mode: str = "stationary",
    n_nonstationary: Optional[int] = None,
    k0: int = settings.K0,
    k_rule: str = "ratio",
    alpha_gate: float = settings.ALPHA_GATE,
    p_share: float = settings.P_SHARE,
    p_max: int = settings.P_MAX
) -> FdfFit:
    """
    Functional-PCA baseline

    Same pipeline as the FDF fits, with loadings taken as lag-0 covariance
    eigenfunctions (of the sample, or of DeltaX and Z in nonstationary mode).
    Counts are K / n_nonstationary when given, else the rules on the lag-0
    eigenvalues.

    Args:
        sample: Functional sample
        K: Total factor count
        mode: "stationary" or "nonstationary"
        n_nonstationary: Number of integrated factors (nonstationary mode)

    Returns:
        FdfFit with estimator "pca"
    """
    if mode == "stationary":
        return _fit_stationary_pipeline(sample, "pca", k0, None, p_share, p_max, k_rule, K)
    if mode == "nonstationary":
        return _fit_nonstationary_pipeline(
            sample, "pca", k0, None, p_share, p_max, k_rule, alpha_gate,
            n_nonstationary, K, False, settings.INDEPENDENCE_LAGS, settings.PROJECTION_DIM,
        )
    raise ParameterError(f"mode must be 'stationary' or 'nonstationary', got '{mode}'")


def reconstruct(fit: FdfFit, n: int) -> np.ndarray:
    """
    Fitted curve n (1-based): mean_curve + sum_k f_{n,k} loading_k

    Args:
        fit: FdfFit
        n: Curve index in [1, N]

    Returns:
        m-vector on the fit grid
    """
    N = fit.n_curves
    if not 1 <= n <= N:
        raise IndexError(f"n must be in [1, {N}], got {n}")
    if fit.loadings.n_loadings == 0:
        return np.array(fit.mean_curve)
    return fit.mean_curve + fit.factors[n - 1] @ fit.loadings.curves


def reconstruct_all(fit: FdfFit) -> np.ndarray:
    """N x m matrix of fitted curves"""
    if fit.loadings.n_loadings == 0:
        return np.tile(fit.mean_curve, (fit.n_curves, 1))
    return fit.mean_curve + fit.factors @ fit.loadings.curves


def fit_summary(fit: FdfFit) -> List[str]:
    """Human-readable lines for logs and the CLI"""
    lines = [
        f"mode={fit.mode} estimator={fit.estimator} K_hat={fit.K_hat} r_hat={fit.r_hat}",
        f"bandwidth={fit.bandwidth} p={fit.p} k0={fit.k0}",
    ]
    for label, values in fit.eigenvalues_all.items():
        lines.append(f"{label} eigenvalues: " + ", ".join(f"{v:.4f}" for v in values))
    for key in ("stationarity", "independence"):
        record: Optional[TestRecord] = fit.diagnostics.get(key)
        if record is not None:
            lines.append(f"{key} test: statistic={record.statistic:.4g} p={record.p_value:.4f}")
    lines.extend(f"warning: {w}" for w in fit.diagnostics.get("warnings", []))
    return lines
