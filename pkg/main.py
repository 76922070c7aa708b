"""
Functional Dynamic Factor Toolkit
Main entry point with CLI interface: fit, simulate, report
"""

import os

# Validated settings size the BLAS thread pools before numpy is imported
from config import settings

BLAS_THREAD_VARIABLES = ("OMP_NUM_THREADS", "MKL_NUM_THREADS", "NUMEXPR_NUM_THREADS",
                         "OPENBLAS_NUM_THREADS", "VECLIB_MAXIMUM_THREADS")


def set_blas_threads(threads: int):
    for variable in BLAS_THREAD_VARIABLES:
        os.environ[variable] = str(threads)


set_blas_threads(settings.BLAS_THREADS)

import argparse
import sys
from pathlib import Path
from typing import List, Literal, Optional

import numpy as np
import pandas as pd
from pydantic import BaseModel, Field, ValidationError, model_validator

from factor_model.diagnostics import stationarity_test
from factor_model.estimators import fit_nonstationary, fit_stationary, fit_summary
from fts.bspline import BSplineBasis, rescale_points, smooth_to_sample
from fts.sample import FunctionalSample, Grid
from reporting.dataset import file_digest, read_wide_csv
from reporting.fit_report import FitReport, Provenance, write_fit_outputs
from reporting.summary import boxplot_summary, k_share_bars, summarize_results
from reporting.svg_plot import bar_chart_svg, boxplot_svg, write_svg
from simlab.harness import SimConfig, SimResult, run_monte_carlo
from utils.errors import FdfError, InputError, InsufficientDataError, ParseError, SchemaError
from utils.logger import DateTimeLogger, get_logger

logger = get_logger(__name__)

EXIT_OK = 0
EXIT_USAGE = 2
EXIT_ESTIMATION = 3

# Auto mode routes to the nonstationary fit below this stationarity p-value
AUTO_ROUTE_LEVEL = 0.05

CSV_OPTIONS = {"index": False, "lineterminator": "\n", "float_format": "%.17g"}


class CliConfig(BaseModel):
    """Validated command-line configuration"""

    subcommand: Literal["fit", "simulate", "report"]
    input: Optional[Path] = None
    out: Path = Path("output")

    # fit
    mode: Literal["auto", "stationary", "nonstationary"] = "auto"
    k0: int = Field(settings.K0, ge=2)
    bandwidth: Optional[float] = Field(None, gt=0.0)
    p_share: float = Field(settings.P_SHARE, gt=0.0, lt=1.0)
    k_rule: Literal["ratio", "scree", "scree_literal"] = "ratio"
    nbasis: int = Field(15, ge=4, description="Cubic B-spline basis size")
    m: int = Field(settings.GRID_SIZE, ge=3, description="Grid size")
    spacing: Literal["calendar", "rank"] = "calendar"
    n_factors: Optional[int] = Field(None, ge=1)
    n_nonstationary: Optional[int] = Field(None, ge=0)
    level_refine: bool = False
    mc_reps: int = Field(settings.MC_REPS, ge=100)

    # simulate
    model: Optional[int] = None
    n: Optional[int] = Field(None, ge=50)
    reps: int = Field(100, ge=1)
    estimators: List[Literal["fdf", "pca"]] = Field(default_factory=lambda: ["fdf", "pca"])
    k_rules: List[Literal["ratio", "scree", "scree_literal"]] = Field(
        default_factory=lambda: ["ratio", "scree"]
    )
    noise_scale: float = Field(1.0, ge=0.0)

    seed: int = Field(0, ge=0)
    workers: Optional[int] = Field(None, ge=1)

    @model_validator(mode="after")
    def consistent_flags(self) -> "CliConfig":
        if self.subcommand in ("fit", "report") and self.input is None:
            raise ValueError(f"{self.subcommand} needs --input")
        if self.subcommand == "simulate" and (self.model is None or self.n is None):
            raise ValueError("simulate needs --model and --n")
        if (
            self.n_factors is not None
            and self.n_nonstationary is not None
            and self.n_factors < self.n_nonstationary
        ):
            raise ValueError("--n-factors must be >= --n-nonstationary")
        return self


def _load_sample(config: CliConfig):
    """Read the CSV and put the curves on a grid (smoothing when q < m)"""
    dataset = read_wide_csv(config.input)
    points = rescale_points(dataset.points, config.spacing)
    q = points.size

    if q >= config.m:
        logger.info(f"{q} observation points >= grid size {config.m}; using them as the grid")
        sample = FunctionalSample(grid=Grid(points), values=dataset.values)
        return dataset, points, sample, None

    if q < 4:
        raise SchemaError(f"cubic smoothing needs at least 4 observation points, got {q}")
    nbasis = config.nbasis
    if nbasis > q:
        logger.warning(f"nbasis={nbasis} exceeds the {q} observation points; using nbasis={q}")
        nbasis = q

    basis = BSplineBasis.from_points(points, nbasis, degree=3)
    sample = smooth_to_sample(points, dataset.values, basis, Grid.uniform(config.m))
    logger.info(f"Smoothed {sample.n_curves} curves with {nbasis} cubic B-splines onto m={config.m}")
    return dataset, points, sample, nbasis


def cmd_fit(config: CliConfig) -> FitReport:
    """
    Fit an FDF model to a wide-format CSV file

    Step 1: read and smooth the curves
    Step 2: stationarity pre-test (routes the fit in auto mode)
    Step 3: stationary or nonstationary fit
    Step 4: write report.json, CSV tables and SVG plots

    Args:
        config: CliConfig for the fit subcommand

    Returns:
        FitReport
    """
    dataset, points, sample, nbasis = _load_sample(config)

    stationarity = None
    if sample.n_curves >= 50:
        stationarity = stationarity_test(
            sample, proj_dim=settings.PROJECTION_DIM, mc_reps=config.mc_reps, seed=config.seed
        )
        logger.info(
            f"Stationarity test: statistic={stationarity.statistic:.4g}, p={stationarity.p_value:.4f}"
        )
    elif config.mode == "auto":
        raise InsufficientDataError(
            f"auto mode needs N >= 50 for the stationarity test, got {sample.n_curves}; "
            "choose --mode explicitly"
        )

    mode = config.mode
    if mode == "auto":
        mode = "nonstationary" if stationarity.p_value < AUTO_ROUTE_LEVEL else "stationary"
        logger.info(f"Auto mode routed to the {mode} fit")

    if mode == "stationary":
        fit = fit_stationary(
            sample, k0=config.k0, b=config.bandwidth, p_share=config.p_share,
            k_rule=config.k_rule, n_factors=config.n_factors,
        )
    else:
        fit = fit_nonstationary(
            sample, k0=config.k0, b=config.bandwidth, p_share=config.p_share,
            k_rule=config.k_rule, alpha_gate=settings.ALPHA_GATE,
            n_nonstationary=config.n_nonstationary, n_factors=config.n_factors,
            level_refine=config.level_refine,
        )
    fit.diagnostics["stationarity"] = stationarity

    provenance = Provenance(
        input_file=str(config.input),
        input_sha256=file_digest(config.input),
        observation_points=dataset.points.tolist(),
        spacing=config.spacing,
        smoothing_basis=nbasis,
        config=config.model_dump(mode="json"),
    )
    report = FitReport.from_fit(fit, provenance)

    axis_points = np.interp(fit.grid.points, points, dataset.points)
    write_fit_outputs(fit, report, config.out, axis_points=axis_points, axis_label="observation point")

    for line in fit_summary(fit):
        print(line)
    return report


def cmd_simulate(config: CliConfig) -> SimResult:
    """
    Run a Monte Carlo study and write results.csv, timings.csv and summary.csv

    Args:
        config: CliConfig for the simulate subcommand

    Returns:
        SimResult
    """
    sim_config = SimConfig(
        model_id=config.model,
        N=config.n,
        m=config.m,
        reps=config.reps,
        master_seed=config.seed,
        noise_scale=config.noise_scale,
        estimators=config.estimators,
        k_rules=config.k_rules,
        k0=config.k0,
        p_share=config.p_share,
        level_refine=config.level_refine,
    )
    result = run_monte_carlo(sim_config, workers=config.workers)

    out_dir = Path(config.out)
    out_dir.mkdir(parents=True, exist_ok=True)

    table = result.table()
    table.to_csv(out_dir / "results.csv", **CSV_OPTIONS)
    result.timings().to_csv(out_dir / "timings.csv", **CSV_OPTIONS)
    summary = summarize_results(table)
    summary.to_csv(out_dir / "summary.csv", **CSV_OPTIONS)

    logger.info(f"Wrote results.csv, timings.csv and summary.csv to {out_dir}")
    print(summary.to_string(index=False))
    return result


def cmd_report(config: CliConfig) -> pd.DataFrame:
    """
    Boxplot statistics and SVG charts from a results.csv file

    Args:
        config: CliConfig for the report subcommand

    Returns:
        Boxplot summary DataFrame
    """
    path = Path(config.input)
    if not path.exists():
        raise FileNotFoundError(f"Results file not found: {path}")
    try:
        frame = pd.read_csv(path)
    except pd.errors.EmptyDataError:
        raise ParseError(f"{path} is empty", row=1)
    except pd.errors.ParserError as e:
        raise ParseError(f"{path} is not a well-formed CSV file: {e}")

    boxes = boxplot_summary(frame)
    summary = summarize_results(frame)

    out_dir = Path(config.out)
    out_dir.mkdir(parents=True, exist_ok=True)
    boxes.to_csv(out_dir / "boxplot_summary.csv", **CSV_OPTIONS)
    summary.to_csv(out_dir / "summary.csv", **CSV_OPTIONS)

    for (model_id, loading), group in boxes.groupby(["model_id", "loading"], sort=True):
        stats = {
            row.estimator.upper(): {k: getattr(row, k) for k in ("min", "q1", "median", "q3", "max")}
            for row in group.itertuples()
        }
        svg = boxplot_svg(stats, title=f"Model {model_id}: ISE of loading {loading}", y_label="ISE")
        write_svg(out_dir / f"boxplot_model{model_id}_loading{loading}.svg", svg)

    for (model_id, rule), bars in k_share_bars(frame).items():
        svg = bar_chart_svg(bars, title=f"Model {model_id}: K_hat by {rule} rule", y_label="share")
        write_svg(out_dir / f"kshare_model{model_id}_{rule}.svg", svg)

    logger.info(f"Wrote report for {frame['model_id'].nunique()} model(s) to {out_dir}")
    print(boxes.to_string(index=False))
    return boxes


def _csv_list(value: str) -> List[str]:
    return [item.strip() for item in value.split(",") if item.strip()]


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="fdf",
        description="Functional dynamic factor models for functional time series",
        formatter_class=argparse.RawDescriptionHelpFormatter,
        epilog="""
Examples:
  # Fit with automatic stationary/nonstationary routing
  python main.py fit --input yields.csv --mode auto --k0 8 --nbasis 15 --out results/yields

  # Monte Carlo study of model 1
  python main.py simulate --model 1 --n 300 --reps 200 --seed 7 --out results/model1

  # Boxplot and factor-count charts from a results file
  python main.py report --input results/model1/results.csv --out results/model1
        """
    )
    parser.add_argument(
        '--log-level',
        type=str,
        choices=['DEBUG', 'INFO', 'WARNING', 'ERROR'],
        default=None,
        help='Logging level (default: FDF_LOG_LEVEL)'
    )
    subparsers = parser.add_subparsers(dest="subcommand", required=True)

    fit = subparsers.add_parser("fit", help="Fit a model to a wide-format CSV file")
    fit.add_argument('--input', required=True, help='CSV with header s,<p_1>,...,<p_q>')
    fit.add_argument('--out', default='output', help='Output directory')
    fit.add_argument('--mode', choices=['auto', 'stationary', 'nonstationary'], default='auto')
    fit.add_argument('--k0', type=int, default=settings.K0, help='Candidate loadings per block')
    fit.add_argument('--bandwidth', type=float, default=None, help='Bandwidth override')
    fit.add_argument('--p-share', type=float, default=settings.P_SHARE, help='Truncation share')
    fit.add_argument('--k-rule', choices=['ratio', 'scree', 'scree_literal'], default='ratio')
    fit.add_argument('--nbasis', type=int, default=15, help='Cubic B-spline basis size')
    fit.add_argument('--grid', type=int, default=settings.GRID_SIZE, help='Grid size m')
    fit.add_argument('--spacing', choices=['calendar', 'rank'], default='calendar',
                     help='Map observation points to [0, 1] by value or by rank')
    fit.add_argument('--n-factors', type=int, default=None, help='Known total factor count')
    fit.add_argument('--n-nonstationary', type=int, default=None, help='Known integrated factor count')
    fit.add_argument('--level-refine', action='store_true',
                     help='Replace the integrated loadings with leading level-covariance eigenfunctions')
    fit.add_argument('--mc-reps', type=int, default=settings.MC_REPS,
                     help='Monte Carlo draws of the stationarity null')
    fit.add_argument('--seed', type=int, default=0)

    simulate = subparsers.add_parser("simulate", help="Monte Carlo study of a catalogue model")
    simulate.add_argument('--model', type=int, required=True, choices=[1, 2, 3, 4])
    simulate.add_argument('--n', type=int, required=True, help='Curves per replication')
    simulate.add_argument('--reps', type=int, default=100)
    simulate.add_argument('--seed', type=int, default=0, help='Master seed')
    simulate.add_argument('--grid', type=int, default=settings.GRID_SIZE, help='Grid size m')
    simulate.add_argument('--noise-scale', type=float, default=1.0)
    simulate.add_argument('--estimators', type=_csv_list, default=['fdf', 'pca'], help='e.g. fdf,pca')
    simulate.add_argument('--k-rules', type=_csv_list, default=['ratio', 'scree'], help='e.g. ratio,scree')
    simulate.add_argument('--k0', type=int, default=settings.K0)
    simulate.add_argument('--p-share', type=float, default=settings.P_SHARE)
    simulate.add_argument('--level-refine', action='store_true',
                          help='Use the level-covariance variant of the integrated loadings')
    simulate.add_argument('--workers', type=int, default=None, help='Worker processes (default: FDF_WORKERS)')
    simulate.add_argument('--out', default='output')

    report = subparsers.add_parser("report", help="Summaries and charts from results.csv")
    report.add_argument('--input', required=True, help='results.csv from simulate')
    report.add_argument('--out', default='output')

    return parser


def _config_from_args(args: argparse.Namespace) -> CliConfig:
    values = {"subcommand": args.subcommand, "input": getattr(args, "input", None), "out": args.out}
    if args.subcommand == "fit":
        values.update(
            mode=args.mode, k0=args.k0, bandwidth=args.bandwidth, p_share=args.p_share,
            k_rule=args.k_rule, nbasis=args.nbasis, m=args.grid, spacing=args.spacing,
            n_factors=args.n_factors, n_nonstationary=args.n_nonstationary,
            level_refine=args.level_refine, mc_reps=args.mc_reps, seed=args.seed,
        )
    elif args.subcommand == "simulate":
        values.update(
            model=args.model, n=args.n, reps=args.reps, seed=args.seed, m=args.grid,
            noise_scale=args.noise_scale, estimators=args.estimators, k_rules=args.k_rules,
            k0=args.k0, p_share=args.p_share, workers=args.workers,
            level_refine=args.level_refine,
        )
    return CliConfig(**values)


COMMANDS = {"fit": cmd_fit, "simulate": cmd_simulate, "report": cmd_report}


def main(argv: Optional[List[str]] = None) -> int:
    """Main entry point; returns the process exit code"""
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as e:
        return int(e.code) if isinstance(e.code, int) else EXIT_USAGE

    if args.log_level:
        DateTimeLogger.set_level(args.log_level)
    settings.validate_settings()

    try:
        config = _config_from_args(args)
        COMMANDS[config.subcommand](config)
    except ValidationError as e:
        logger.error(f"Invalid arguments: {e}")
        return EXIT_USAGE
    except (InputError, FileNotFoundError) as e:
        logger.error(f"Input error: {e}")
        return EXIT_USAGE
    except (FdfError, np.linalg.LinAlgError) as e:
        logger.error(f"Estimation failed: {type(e).__name__}: {e}")
        return EXIT_ESTIMATION

    return EXIT_OK


if __name__ == "__main__":
    sys.exit(main())
