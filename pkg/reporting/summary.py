"""
Simulation Summaries
Per-model medians and factor-count shares from results.csv, plus
five-number summaries for the ISE boxplots
"""

import re
from typing import Dict, Tuple

import numpy as np
import pandas as pd

from simlab.generators import load_model_catalogue
from utils.errors import SchemaError
from utils.logger import get_logger

logger = get_logger(__name__)

ISE_COLUMN = re.compile(r"^ise_(?P<estimator>[a-z]+)_(?P<loading>\d+)$")
K_COLUMN = re.compile(r"^k_hat_(?P<rule>[a-z_]+)$")


def validate_results(frame: pd.DataFrame) -> pd.DataFrame:
    """Check the results schema; raises SchemaError"""
    missing = [c for c in ("model_id", "rep_index") if c not in frame.columns]
    if missing:
        raise SchemaError(f"results table is missing columns: {', '.join(missing)}")
    if not any(ISE_COLUMN.match(c) for c in frame.columns):
        raise SchemaError("results table has no ise_<estimator>_<k> columns")
    return frame


def successful_rows(frame: pd.DataFrame) -> pd.DataFrame:
    if "error" not in frame.columns:
        return frame
    errors = frame["error"].fillna("").astype(str)
    return frame[errors == ""]


def _shares(values: pd.Series, prefix: str) -> Dict[str, float]:
    values = values.dropna()
    if values.empty:
        return {}
    counts = values.astype(int).value_counts(normalize=True)
    return {f"{prefix}_{int(v)}": float(counts[v]) for v in sorted(counts.index)}


def summarize_results(frame: pd.DataFrame) -> pd.DataFrame:
    """
    One row per model: replication counts, median ISE per estimator and
    loading, and the share of replications for every factor-count value

    Nonstationary models also get shares of r_hat (share_r_<rule>_<v>) and of
    K_hat - r_hat (share_kr_<rule>_<v>).

    Args:
        frame: results table

    Returns:
        Wide summary DataFrame
    """
    validate_results(frame)
    catalogue = load_model_catalogue()
    rows = []

    for model_id, group in frame.groupby("model_id", sort=True):
        ok = successful_rows(group)
        row = {"model_id": int(model_id), "n_reps": int(len(group)), "n_failed": int(len(group) - len(ok))}

        for column in sorted(c for c in frame.columns if ISE_COLUMN.match(c)):
            row[f"median_{column}"] = float(ok[column].median()) if ok[column].notna().any() else np.nan

        nonstationary = any(
            f["kind"] == "i1" for f in catalogue.get(int(model_id), {}).get("factors", [])
        )
        for column in sorted(c for c in frame.columns if K_COLUMN.match(c)):
            rule = K_COLUMN.match(column).group("rule")
            row.update(_shares(ok[column], f"share_k_{rule}"))
            r_column = f"r_hat_{rule}"
            if nonstationary and r_column in ok.columns:
                row.update(_shares(ok[r_column], f"share_r_{rule}"))
                row.update(_shares(ok[column] - ok[r_column], f"share_kr_{rule}"))
        rows.append(row)

    summary = pd.DataFrame.from_records(rows)
    fixed = ["model_id", "n_reps", "n_failed"]
    return summary[fixed + sorted(c for c in summary.columns if c not in fixed)]


def boxplot_summary(frame: pd.DataFrame) -> pd.DataFrame:
    """
    Five-number summaries (min, q1, median, q3, max) of every ISE column per model

    Returns:
        Long DataFrame with columns model_id, estimator, loading, n, min, q1, median, q3, max
    """
    validate_results(frame)
    rows = []
    for model_id, group in frame.groupby("model_id", sort=True):
        ok = successful_rows(group)
        for column in sorted(c for c in frame.columns if ISE_COLUMN.match(c)):
            values = ok[column].dropna().to_numpy(dtype=float)
            if values.size == 0:
                continue
            q1, median, q3 = np.quantile(values, [0.25, 0.5, 0.75])
            match = ISE_COLUMN.match(column)
            rows.append({
                "model_id": int(model_id),
                "estimator": match.group("estimator"),
                "loading": int(match.group("loading")),
                "n": int(values.size),
                "min": float(values.min()),
                "q1": float(q1),
                "median": float(median),
                "q3": float(q3),
                "max": float(values.max()),
            })
    return pd.DataFrame.from_records(
        rows, columns=["model_id", "estimator", "loading", "n", "min", "q1", "median", "q3", "max"]
    )


def k_share_bars(frame: pd.DataFrame) -> Dict[Tuple[int, str], Dict[str, float]]:
    """(model_id, rule) -> {"K=v": share} for the factor-count bar charts"""
    validate_results(frame)
    bars = {}
    for model_id, group in frame.groupby("model_id", sort=True):
        ok = successful_rows(group)
        for column in sorted(c for c in frame.columns if K_COLUMN.match(c)):
            rule = K_COLUMN.match(column).group("rule")
            shares = _shares(ok[column], "K")
            bars[(int(model_id), rule)] = {key.replace("K_", "K="): value for key, value in shares.items()}
    return bars
