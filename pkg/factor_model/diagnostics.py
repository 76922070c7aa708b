"""
Pre-tests
Portmanteau independence test on projected scores and partial-sum
(bridge) stationarity tests with Monte Carlo null distributions
"""

from dataclasses import asdict, dataclass, field
from typing import Optional

import numpy as np
from scipy import stats

from config import settings
from covariance.kernels import bartlett_weight, select_bandwidth
from covariance.spectral import cov0_spectrum
from fts.sample import FunctionalSample, center
from utils.errors import ConditioningError, InsufficientDataError, ParameterError
from utils.logger import get_logger

logger = get_logger(__name__)

# Terms kept in the series for the integral of a squared Brownian bridge
BRIDGE_TERMS = 200


@dataclass
class TestRecord:
    """Outcome of a hypothesis test"""

    statistic: float
    p_value: float
    method: str
    parameters: dict = field(default_factory=dict)

    # Keep pytest from collecting this class
    __test__ = False

    def __post_init__(self):
        self.statistic = float(self.statistic)
        self.p_value = float(min(1.0, max(0.0, self.p_value)))

    def rejects(self, level: float) -> bool:
        return self.p_value < level

    def to_dict(self) -> dict:
        return asdict(self)


def bridge_integral_draws(
    n_draws: int,
    rng: np.random.Generator,
    n_terms: int = BRIDGE_TERMS
) -> np.ndarray:
    """
    Draws of the integral of a squared standard Brownian bridge

    Uses the series sum_k z_k^2 / (k pi)^2 truncated after n_terms terms,
    with the mean of the dropped tail added back.

    Args:
        n_draws: Number of draws
        rng: numpy Generator
        n_terms: Series terms kept

    Returns:
        n_draws-vector (mean 1/6)
    """
    k = np.arange(1, n_terms + 1)
    coefficients = 1.0 / (k * np.pi) ** 2
    tail_mean = 1.0 / 6.0 - coefficients.sum()

    z = rng.standard_normal((n_draws, n_terms))
    return (z * z) @ coefficients + tail_mean


def _monte_carlo_p_value(statistic: float, null_draws: np.ndarray) -> float:
    exceed = int(np.sum(null_draws >= statistic))
    return (1 + exceed) / (1 + null_draws.size)


def _lagged_cov(Y: np.ndarray, h: int) -> np.ndarray:
    N = Y.shape[0]
    return Y[:N - h].T @ Y[h:] / N


def _bartlett_longrun_matrix(Y: np.ndarray, b: float) -> np.ndarray:
    """Bartlett long-run covariance matrix of a centered (N x d) series"""
    N = Y.shape[0]
    total = _lagged_cov(Y, 0)
    h = 1
    while h < b and h < N:
        gamma = _lagged_cov(Y, h)
        total = total + bartlett_weight(h, b) * (gamma + gamma.T)
        h += 1
    return (total + total.T) / 2.0


def _bartlett_longrun_trace(values: np.ndarray, weights: np.ndarray, b: float) -> float:
    """Trace (integral of the diagonal) of the Bartlett long-run kernel of centered curves"""
    N = values.shape[0]
    weighted = values * weights
    trace = float(np.sum(weighted * values)) / N
    h = 1
    while h < b and h < N:
        trace += 2.0 * bartlett_weight(h, b) * float(np.sum(weighted[:N - h] * values[h:])) / N
        h += 1
    return trace


def _projected_scores(sample: FunctionalSample, proj_dim: int) -> np.ndarray:
    centered = center(sample)
    spectrum = cov0_spectrum(centered)
    d = min(proj_dim, spectrum.n_positive)
    if d == 0:
        raise ConditioningError("sample has no variation to project onto")
    basis = spectrum.leading(d)
    return centered.values @ (basis * sample.grid.weights).T


def independence_test(
    sample: FunctionalSample,
    H: int = 10,
    proj_dim: int = 3
) -> TestRecord:
    """
    Portmanteau test of serial independence on projected scores

    The curves are projected onto the first proj_dim eigenfunctions of their
    own lag-0 covariance; Q = N sum_{h=1}^{H} tr(R_h^T R_0^-1 R_h R_0^-1) is
    compared with a chi-square law on proj_dim^2 H degrees of freedom.

    Args:
        sample: Functional sample (centered internally)
        H: Lag horizon
        proj_dim: Projection dimension

    Returns:
        TestRecord
    """
    N = sample.n_curves
    if H < 1 or proj_dim < 1:
        raise ParameterError("H and proj_dim must be >= 1")
    if N <= H + proj_dim:
        raise InsufficientDataError(f"independence test needs N > H + proj_dim, got N = {N}")

    Y = _projected_scores(sample, proj_dim)
    d = Y.shape[1]

    R0 = _lagged_cov(Y, 0)
    eig = np.linalg.eigvalsh(R0)
    if eig[0] <= settings.ZERO_EIGENVALUE * max(eig[-1], settings.ZERO_EIGENVALUE):
        raise ConditioningError("score covariance is rank deficient")
    R0_inv = np.linalg.inv(R0)

    Q = 0.0
    for h in range(1, H + 1):
        Rh = _lagged_cov(Y, h)
        Q += float(np.trace(Rh.T @ R0_inv @ Rh @ R0_inv))
    Q *= N

    dof = d * d * H
    p_value = float(stats.chi2.sf(Q, dof))

    logger.debug(f"Independence test: Q={Q:.3f}, dof={dof}, p={p_value:.4f}")
    return TestRecord(
        statistic=Q,
        p_value=p_value,
        method="projected portmanteau",
        parameters={"lags": H, "proj_dim": d, "dof": dof},
    )


def stationarity_test(
    sample: FunctionalSample,
    proj_dim: int = 3,
    mc_reps: int = 5000,
    seed: Optional[int] = 0,
    b: Optional[float] = None
) -> TestRecord:
    """
    Partial-sum stationarity test for functional series

    Statistic T = N^-2 sum_n ||S_n - (n/N) S_N||^2 with S_n the partial sums
    of the centered curves. Its null law is approximated by
    sum_i nu_i int B_i^2 with nu_i the Bartlett long-run variances of the first
    proj_dim score series, plus one bridge term weighted by the long-run mass
    outside those directions; mc_reps draws give the p-value.

    Args:
        sample: Functional sample (N >= 50)
        proj_dim: Score directions with their own null weight
        mc_reps: Monte Carlo draws of the null law
        seed: Seed of the null draws
        b: Bandwidth of the long-run variances (rule of thumb when omitted)

    Returns:
        TestRecord with a Monte Carlo p-value
    """
    N = sample.n_curves
    if N < 50:
        raise InsufficientDataError(f"stationarity test needs N >= 50, got {N}")
    if mc_reps < 1:
        raise ParameterError(f"mc_reps must be >= 1, got {mc_reps}")

    weights = sample.grid.weights
    centered = sample.values - sample.values.mean(axis=0)

    partial = np.cumsum(centered, axis=0)
    fraction = np.arange(1, N + 1)[:, np.newaxis] / N
    bridge = partial - fraction * partial[-1]
    statistic = float(np.sum((bridge * bridge) @ weights)) / N ** 2

    bandwidth = select_bandwidth(N, b)
    scores = _projected_scores(sample, proj_dim)
    nu = np.clip(np.linalg.eigvalsh(_bartlett_longrun_matrix(scores, bandwidth)), 0.0, None)
    nu_rest = max(0.0, _bartlett_longrun_trace(centered, weights, bandwidth) - nu.sum())

    rng = np.random.default_rng(seed)
    null_draws = np.zeros(mc_reps)
    for weight in [*nu[::-1], nu_rest]:
        draws = bridge_integral_draws(mc_reps, rng)
        if weight > 0:
            null_draws += weight * draws

    p_value = _monte_carlo_p_value(statistic, null_draws)

    logger.debug(f"Stationarity test: T={statistic:.4g}, b={bandwidth:g}, p={p_value:.4f}")
    return TestRecord(
        statistic=statistic,
        p_value=p_value,
        method="functional partial-sum bridge",
        parameters={
            "proj_dim": int(nu.size),
            "mc_reps": mc_reps,
            "bandwidth": bandwidth,
            "seed": seed,
            "longrun_weights": [float(v) for v in nu[::-1]] + [float(nu_rest)],
        },
    )


def scalar_stationarity_test(
    series,
    mc_reps: int = 5000,
    seed: Optional[int] = 0,
    b: Optional[float] = None
) -> TestRecord:
    """
    Partial-sum stationarity test for a scalar series

    Statistic N^-2 sum_n (S_n - (n/N) S_N)^2 / omega^2 with omega^2 the
    Bartlett long-run variance; p-value from simulated bridge integrals.

    Args:
        series: N-vector
        mc_reps: Monte Carlo draws of the null law
        seed: Seed of the null draws
        b: Bandwidth (rule of thumb when omitted)

    Returns:
        TestRecord
    """
    x = np.asarray(series, dtype=float).ravel()
    N = x.size
    if N < 10:
        raise InsufficientDataError(f"scalar stationarity test needs N >= 10, got {N}")

    x = x - x.mean()
    bandwidth = select_bandwidth(N, b)
    omega2 = float(_bartlett_longrun_matrix(x[:, np.newaxis], bandwidth)[0, 0])
    if omega2 <= 0:
        raise ConditioningError("series has zero long-run variance")

    partial = np.cumsum(x)
    bridge = partial - np.arange(1, N + 1) / N * partial[-1]
    statistic = float(np.sum(bridge ** 2)) / (N ** 2 * omega2)

    rng = np.random.default_rng(seed)
    p_value = _monte_carlo_p_value(statistic, bridge_integral_draws(mc_reps, rng))

    return TestRecord(
        statistic=statistic,
        p_value=p_value,
        method="scalar partial-sum bridge",
        parameters={"mc_reps": mc_reps, "bandwidth": bandwidth, "seed": seed},
    )
