"""
Fit Report
Validated JSON report of a fit and the CSV/SVG artifacts written next to it
"""

from pathlib import Path
from typing import Dict, List, Optional

import numpy as np
import pandas as pd
from pydantic import BaseModel, Field

from factor_model.diagnostics import TestRecord
from factor_model.estimators import FdfFit, reconstruct_all
from reporting.dataset import write_wide_csv
from reporting.svg_plot import line_chart_svg, write_svg
from utils.logger import get_logger

logger = get_logger(__name__)

TOOLKIT_VERSION = "1.0.0"


class HypothesisTestModel(BaseModel):
    statistic: float
    p_value: float = Field(..., ge=0.0, le=1.0)
    method: str
    parameters: dict = Field(default_factory=dict)

    @classmethod
    def from_record(cls, record: Optional[TestRecord]) -> Optional["HypothesisTestModel"]:
        if record is None:
            return None
        return cls(**record.to_dict())


class LoadingsModel(BaseModel):
    grid: List[float]
    curves: List[List[float]]
    block_labels: List[str]


class Provenance(BaseModel):
    input_file: Optional[str] = None
    input_sha256: Optional[str] = None
    toolkit_version: str = TOOLKIT_VERSION
    observation_points: List[float] = Field(default_factory=list, description="Original scale")
    spacing: str = "calendar"
    smoothing_basis: Optional[int] = None
    config: dict = Field(default_factory=dict)


class FitReport(BaseModel):
    """report.json: everything in the fit plus provenance"""

    mode: str
    estimator: str = "fdf"
    K_hat: int
    r_hat: int
    bandwidth: Optional[float]
    p: int
    k0: int
    k_rule: str
    eigenvalues: Dict[str, List[float]]
    loadings: LoadingsModel
    factors: List[List[float]]
    tests: Dict[str, Optional[HypothesisTestModel]]
    mean_curve: List[float]
    low_signal: bool = False
    warnings: List[str] = Field(default_factory=list)
    k_hat_by_rule: Dict[str, Dict[str, int]] = Field(default_factory=dict)
    provenance: Provenance = Field(default_factory=Provenance)

    @classmethod
    def from_fit(cls, fit: FdfFit, provenance: Optional[Provenance] = None) -> "FitReport":
        diagnostics = fit.diagnostics
        return cls(
            mode=fit.mode,
            estimator=fit.estimator,
            K_hat=fit.K_hat,
            r_hat=fit.r_hat,
            bandwidth=fit.bandwidth,
            p=fit.p,
            k0=fit.k0,
            k_rule=fit.k_rule,
            eigenvalues={k: np.asarray(v, dtype=float).tolist() for k, v in fit.eigenvalues_all.items()},
            loadings=LoadingsModel(
                grid=fit.grid.points.tolist(),
                curves=fit.loadings.curves.tolist(),
                block_labels=list(fit.loadings.block_labels),
            ),
            factors=fit.factors.tolist(),
            tests={
                "stationarity": HypothesisTestModel.from_record(diagnostics.get("stationarity")),
                "independence": HypothesisTestModel.from_record(diagnostics.get("independence")),
            },
            mean_curve=np.asarray(fit.mean_curve, dtype=float).tolist(),
            low_signal=bool(diagnostics.get("low_signal", False)),
            warnings=list(diagnostics.get("warnings", [])),
            k_hat_by_rule=diagnostics.get("k_hat_by_rule", {}),
            provenance=provenance or Provenance(),
        )

    def save(self, path):
        Path(path).write_text(self.model_dump_json(indent=2), encoding="utf-8")

    @classmethod
    def load(cls, path) -> "FitReport":
        return cls.model_validate_json(Path(path).read_text(encoding="utf-8"))


def write_fit_outputs(
    fit: FdfFit,
    report: FitReport,
    out_dir,
    axis_points: Optional[np.ndarray] = None,
    axis_label: str = "s"
) -> List[Path]:
    """
    Write report.json, loadings.csv, factors.csv, reconstruction.csv and one
    SVG per loading and per factor path

    Args:
        fit: FdfFit
        report: FitReport built from fit
        out_dir: Output directory (created if missing)
        axis_points: Grid mapped back to the original observation scale for plots
        axis_label: x-axis label of the loading plots

    Returns:
        Paths written
    """
    out_dir = Path(out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)
    written = []

    report_path = out_dir / "report.json"
    report.save(report_path)
    written.append(report_path)

    names = [f"loading_{k}" for k in range(1, fit.K_hat + 1)]

    loadings_path = out_dir / "loadings.csv"
    loadings = pd.DataFrame(fit.loadings.curves.T, columns=names)
    loadings.insert(0, "s", fit.grid.points)
    loadings.to_csv(loadings_path, index=False, lineterminator="\n", float_format="%.17g")
    written.append(loadings_path)

    factors_path = out_dir / "factors.csv"
    factors = pd.DataFrame(fit.factors, columns=[f"factor_{k}" for k in range(1, fit.K_hat + 1)])
    factors.insert(0, "n", np.arange(1, fit.n_curves + 1))
    factors.to_csv(factors_path, index=False, lineterminator="\n", float_format="%.17g")
    written.append(factors_path)

    reconstruction_path = out_dir / "reconstruction.csv"
    write_wide_csv(reconstruction_path, fit.grid.points, reconstruct_all(fit))
    written.append(reconstruction_path)

    x = fit.grid.points if axis_points is None else np.asarray(axis_points)
    for k in range(fit.K_hat):
        label = fit.loadings.block_labels[k]
        svg = line_chart_svg(
            x, {names[k]: fit.loadings.curves[k]},
            title=f"Loading {k + 1} ({label})", x_label=axis_label, y_label="loading",
        )
        written.append(write_svg(out_dir / f"loading_{k + 1}.svg", svg))

        svg = line_chart_svg(
            np.arange(1, fit.n_curves + 1), {f"factor_{k + 1}": fit.factors[:, k]},
            title=f"Factor {k + 1} ({label})", x_label="n", y_label="score",
        )
        written.append(write_svg(out_dir / f"factor_{k + 1}.svg", svg))

    logger.info(f"Wrote {len(written)} files to {out_dir}")
    return written
