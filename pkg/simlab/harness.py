"""
Monte Carlo Harness
Seeded replications of the catalogue models, FDF and PCA fits per
replication, and a deterministic results table
"""

import time
from functools import partial
from multiprocessing import Pool
from typing import List, Literal, Optional

import numpy as np
import pandas as pd
from pydantic import BaseModel, ConfigDict, Field, field_validator
from tqdm import tqdm

from config import settings
from factor_model.estimators import fit_nonstationary, fit_pca_baseline, fit_stationary
from simlab.generators import load_model_catalogue, simulate_model
from simlab.metrics import ise, match_loadings
from utils.logger import get_logger

logger = get_logger(__name__)

Estimator = Literal["fdf", "pca"]
KRule = Literal["ratio", "scree", "scree_literal"]


class SimConfig(BaseModel):
    """Monte Carlo run settings"""

    model_config = ConfigDict(frozen=True)

    model_id: int = Field(..., description="Catalogue model (1-4)")
    N: int = Field(..., ge=50, description="Curves per replication")
    m: int = Field(101, ge=3, description="Uniform grid size")
    reps: int = Field(..., ge=1, description="Number of replications")
    master_seed: int = Field(0, ge=0, lt=2 ** 64, description="Master seed")
    noise_scale: float = Field(1.0, ge=0.0)
    estimators: List[Estimator] = Field(default_factory=lambda: ["fdf", "pca"])
    k_rules: List[KRule] = Field(default_factory=lambda: ["ratio", "scree"])
    k0: int = Field(settings.K0, ge=2)
    p_share: float = Field(settings.P_SHARE, gt=0.0, lt=1.0)
    level_refine: bool = Field(False, description="Level-covariance variant of the integrated loadings")

    @field_validator("model_id")
    @classmethod
    def known_model(cls, value: int) -> int:
        catalogue = load_model_catalogue()
        if value not in catalogue:
            raise ValueError(f"model_id must be one of {sorted(catalogue)}")
        return value


class SimResult:
    """Per-replication records of a Monte Carlo run, sorted by rep_index"""

    def __init__(self, config: SimConfig, records: List[dict]):
        self.config = config
        self.records = sorted(records, key=lambda row: row["rep_index"])

    def table(self, include_timing: bool = False) -> pd.DataFrame:
        """
        Results as a DataFrame

        Args:
            include_timing: Keep the wall_time column (dropped by default so
                            repeated runs give identical tables)
        """
        frame = pd.DataFrame.from_records(self.records)
        if not include_timing:
            frame = frame.drop(columns=["wall_time"], errors="ignore")
        return frame

    def timings(self) -> pd.DataFrame:
        return self.table(include_timing=True)[["model_id", "rep_index", "wall_time"]]

    @property
    def n_failed(self) -> int:
        return sum(1 for row in self.records if row["error"])


def replication_seed(master_seed: int, rep_index: int) -> np.random.SeedSequence:
    """Independent stream for one replication, fixed by (master_seed, rep_index)"""
    return np.random.SeedSequence(master_seed, spawn_key=(rep_index,))


def _empty_record(config: SimConfig, rep_index: int, seed_value: int, n_loadings: int) -> dict:
    record = {"model_id": config.model_id, "rep_index": rep_index, "seed": seed_value}
    for estimator in ("fdf", "pca"):
        for k in range(1, n_loadings + 1):
            record[f"ise_{estimator}_{k}"] = np.nan
    for rule in config.k_rules:
        record[f"k_hat_{rule}"] = np.nan
        record[f"r_hat_{rule}"] = np.nan
    record["error"] = ""
    return record


def _record_ise(record: dict, estimator: str, true_loadings: np.ndarray, fit, grid):
    assignment = match_loadings(true_loadings, fit.loadings.curves, grid)
    for k, j in enumerate(assignment, start=1):
        if j >= 0:
            record[f"ise_{estimator}_{k}"] = ise(true_loadings[k - 1], fit.loadings.curves[j], grid)


def run_replication(config: SimConfig, rep_index: int) -> dict:
    """
    One replication: simulate, fit, score

    FDF and PCA are fitted with the true counts for the ISE columns; FDF is
    refitted once per k_rule with free counts for the K/r columns. Failures
    are recorded in the error column.
    """
    started = time.perf_counter()
    seed = replication_seed(config.master_seed, rep_index)
    seed_value = int(seed.generate_state(1, dtype=np.uint64)[0])

    catalogue = load_model_catalogue()
    n_loadings = len(catalogue[config.model_id]["factors"])
    record = _empty_record(config, rep_index, seed_value, n_loadings)

    try:
        draw = simulate_model(config.model_id, config.N, config.m, seed, config.noise_scale)
        grid = draw.sample.grid
        K = draw.loadings.shape[0]
        r = draw.n_nonstationary
        common = {"k0": config.k0, "p_share": config.p_share}

        if r == 0:
            fit_fdf = partial(fit_stationary, draw.sample, **common)
        else:
            fit_fdf = partial(fit_nonstationary, draw.sample, level_refine=config.level_refine, **common)

        if "fdf" in config.estimators:
            if r == 0:
                known = fit_fdf(n_factors=K)
            else:
                known = fit_fdf(n_factors=K, n_nonstationary=r)
            _record_ise(record, "fdf", draw.loadings, known, grid)

            for rule in config.k_rules:
                free = fit_fdf(k_rule=rule)
                record[f"k_hat_{rule}"] = free.K_hat
                record[f"r_hat_{rule}"] = free.r_hat

        if "pca" in config.estimators:
            mode = "stationary" if r == 0 else "nonstationary"
            baseline = fit_pca_baseline(
                draw.sample, K=K, mode=mode,
                n_nonstationary=r if r else None, **common,
            )
            _record_ise(record, "pca", draw.loadings, baseline, grid)

    except Exception as e:
        logger.warning(f"Replication {rep_index} failed: {type(e).__name__}: {e}")
        record["error"] = f"{type(e).__name__}: {e}"

    record["wall_time"] = time.perf_counter() - started
    return record


def run_monte_carlo(
    config: SimConfig,
    workers: Optional[int] = None,
    progress: bool = True
) -> SimResult:
    """
    Run all replications of a configuration

    Results depend only on (config, rep_index), so the worker count never
    changes them.

    Args:
        config: SimConfig
        workers: Process count (FDF_WORKERS when omitted; 1 runs in-process)
        progress: Show a tqdm progress bar

    Returns:
        SimResult
    """
    workers = workers or settings.WORKERS
    workers = max(1, min(workers, config.reps))
    logger.info(
        f"Monte Carlo: model {config.model_id}, N={config.N}, reps={config.reps}, "
        f"seed={config.master_seed}, workers={workers}"
    )

    task = partial(run_replication, config)
    indices = range(config.reps)
    label = f"model {config.model_id} N={config.N}"

    if workers == 1:
        records = [task(i) for i in tqdm(indices, desc=label, disable=not progress)]
    else:
        with Pool(processes=workers) as pool:
            records = list(tqdm(
                pool.imap_unordered(task, indices, chunksize=max(1, config.reps // (4 * workers))),
                total=config.reps,
                desc=label,
                disable=not progress,
            ))

    result = SimResult(config, records)
    if result.n_failed:
        logger.warning(f"{result.n_failed} of {config.reps} replications failed")
    logger.info(f"Monte Carlo finished: {config.reps - result.n_failed} successful replications")
    return result
