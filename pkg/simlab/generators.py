"""
Simulation Generators
AR(1) and ARIMA(1,1,0) factor paths, Brownian-motion noise curves, the
catalogue models and a synthetic yield-curve panel
"""

import json
from functools import lru_cache
from pathlib import Path
from typing import Dict, NamedTuple, Union

import numpy as np
from scipy import signal

from config.settings import ConfigurationError
from fts.sample import FunctionalSample, Grid
from utils.errors import ParameterError
from utils.logger import get_logger

logger = get_logger(__name__)

MODELS_PATH = Path(__file__).resolve().parent.parent / "config" / "simulation_models.json"

SeedLike = Union[None, int, np.random.SeedSequence, np.random.Generator]

LOADING_CURVES = {
    "sin": lambda s: np.sin(2.0 * np.pi * s),
    "cos": lambda s: np.cos(2.0 * np.pi * s),
}

# Constant-maturity Treasury maturities in years (3m to 10y)
YIELD_MATURITIES = (0.25, 0.5, 1.0, 2.0, 3.0, 5.0, 7.0, 10.0)


class ModelDraw(NamedTuple):
    """One simulated panel with its ground truth"""
    sample: FunctionalSample
    loadings: np.ndarray
    factors: np.ndarray
    n_nonstationary: int


class YieldFixture(NamedTuple):
    maturities: np.ndarray
    values: np.ndarray


def as_generator(seed: SeedLike) -> np.random.Generator:
    if isinstance(seed, np.random.Generator):
        return seed
    return np.random.default_rng(seed)


@lru_cache(maxsize=1)
def load_model_catalogue() -> Dict[int, dict]:
    """
    Load the simulation models from config/simulation_models.json

    Returns:
        Dict model_id -> {"description", "factors": [{"loading", "kind", "coef"}]}
    """
    if not MODELS_PATH.exists():
        raise ConfigurationError(f"Simulation catalogue not found at {MODELS_PATH}")

    with open(MODELS_PATH, "r", encoding="utf-8") as f:
        raw = json.load(f)

    catalogue = {}
    for key, model in raw.get("models", {}).items():
        for factor in model["factors"]:
            if factor["loading"] not in LOADING_CURVES:
                raise ConfigurationError(f"Model {key}: unknown loading '{factor['loading']}'")
            if factor["kind"] not in ("ar1", "i1"):
                raise ConfigurationError(f"Model {key}: unknown factor kind '{factor['kind']}'")
        catalogue[int(key)] = model

    logger.debug(f"Loaded {len(catalogue)} simulation models from {MODELS_PATH}")
    return catalogue


def gen_ar1(N: int, a: float, seed: SeedLike = None) -> np.ndarray:
    """
    Stationary AR(1) path f_n = a f_{n-1} + u_n with standard Gaussian u

    f_0 is drawn from the stationary law N(0, 1/(1 - a^2)).

    Args:
        N: Path length
        a: Coefficient with |a| < 1
        seed: Seed, SeedSequence or Generator

    Returns:
        N-vector (f_1, ..., f_N)
    """
    if not abs(a) < 1:
        raise ParameterError(f"AR(1) coefficient must satisfy |a| < 1, got {a}")
    if N < 1:
        raise ParameterError(f"N must be >= 1, got {N}")

    rng = as_generator(seed)
    f0 = rng.normal(0.0, np.sqrt(1.0 / (1.0 - a * a)))
    innovations = rng.standard_normal(N)
    path, _ = signal.lfilter([1.0], [1.0, -a], innovations, zi=[a * f0])
    return path


def gen_i1(N: int, phi: float, seed: SeedLike = None) -> np.ndarray:
    """
    ARIMA(1,1,0) path: cumulative sum of an AR(1) path, started at f_0 = 0

    Args:
        N: Path length
        phi: AR coefficient of the increments, |phi| < 1
        seed: Seed, SeedSequence or Generator

    Returns:
        N-vector
    """
    return np.cumsum(gen_ar1(N, phi, seed))


def gen_bm_noise(N: int, grid: Grid, seed: SeedLike = None) -> FunctionalSample:
    """
    N independent standard Brownian motions on a uniform grid

    Args:
        N: Number of curves
        grid: Uniform grid
        seed: Seed, SeedSequence or Generator

    Returns:
        FunctionalSample with W(0) = 0 exactly
    """
    if not grid.is_uniform:
        raise ParameterError("Brownian-motion noise needs a uniform grid")

    rng = as_generator(seed)
    step = 1.0 / (grid.m - 1)
    increments = np.sqrt(step) * rng.standard_normal((N, grid.m - 1))
    paths = np.zeros((N, grid.m))
    paths[:, 1:] = np.cumsum(increments, axis=1)
    return FunctionalSample(grid=grid, values=paths)


def simulate_model(
    model_id: int,
    N: int,
    m: int = 101,
    seed: SeedLike = None,
    noise_scale: float = 1.0
) -> ModelDraw:
    """
    X_n = sum_k f_{n,k} loading_k + noise_scale W_n for a catalogue model

    Factors are drawn first (in catalogue order), then the noise curves,
    all from one Generator.

    Args:
        model_id: Catalogue model (1-4)
        N: Number of curves
        m: Uniform grid size
        seed: Seed, SeedSequence or Generator
        noise_scale: Scale of the Brownian-motion noise

    Returns:
        ModelDraw(sample, loadings K x m, factors N x K, n_nonstationary)
    """
    catalogue = load_model_catalogue()
    if model_id not in catalogue:
        raise ParameterError(f"model_id must be one of {sorted(catalogue)}, got {model_id}")
    if noise_scale < 0:
        raise ParameterError(f"noise_scale must be >= 0, got {noise_scale}")

    grid = Grid.uniform(m)
    rng = as_generator(seed)
    spec = catalogue[model_id]

    loadings = []
    factors = []
    for factor in spec["factors"]:
        loadings.append(LOADING_CURVES[factor["loading"]](grid.points))
        generator = gen_i1 if factor["kind"] == "i1" else gen_ar1
        factors.append(generator(N, factor["coef"], rng))

    loadings = np.array(loadings)
    factors = np.column_stack(factors)
    noise = gen_bm_noise(N, grid, rng).values

    values = factors @ loadings + noise_scale * noise
    n_nonstationary = sum(1 for factor in spec["factors"] if factor["kind"] == "i1")

    return ModelDraw(
        sample=FunctionalSample(grid=grid, values=values),
        loadings=loadings,
        factors=factors,
        n_nonstationary=n_nonstationary,
    )


def yield_loadings(points) -> np.ndarray:
    """Orthonormal level, slope and curvature curves (shifted Legendre polynomials)"""
    s = np.asarray(points, dtype=float)
    return np.array([
        np.ones_like(s),
        np.sqrt(3.0) * (2.0 * s - 1.0),
        np.sqrt(5.0) * (6.0 * s * s - 6.0 * s + 1.0),
    ])


def make_yield_fixture(N: int = 366, seed: SeedLike = 0, noise: float = 0.02) -> YieldFixture:
    """
    Synthetic monthly yield panel with a level/slope/curvature structure

    The level follows a random walk, the slope an AR(1) with 0.9 and the
    curvature an AR(1) with 0.5; observations add small independent noise.

    Args:
        N: Number of months
        seed: Seed, SeedSequence or Generator
        noise: Standard deviation of the observation noise

    Returns:
        YieldFixture(maturities (8,), values N x 8) in percent
    """
    rng = as_generator(seed)
    maturities = np.array(YIELD_MATURITIES)
    s = (maturities - maturities[0]) / (maturities[-1] - maturities[0])

    level = 6.0 + 0.25 * np.cumsum(rng.standard_normal(N))
    slope = 0.6 * gen_ar1(N, 0.9, rng)
    curvature = 0.2 * gen_ar1(N, 0.5, rng)

    factors = np.column_stack([level, slope, curvature])
    values = factors @ yield_loadings(s) + noise * rng.standard_normal((N, maturities.size))
    return YieldFixture(maturities=maturities, values=values)
