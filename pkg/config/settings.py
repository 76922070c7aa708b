"""
Toolkit settings
Every tunable default is read once from the environment (.env supported) and
validated here, so estimation code never touches os.environ directly
"""

import os
import sys
from dotenv import load_dotenv

from utils.errors import FdfError
from utils.logger import get_logger

load_dotenv()

logger = get_logger(__name__)


class ConfigurationError(FdfError):
    """Raised when an FDF_* setting has an invalid value"""
    pass


def _read_int(name: str, default: int) -> int:
    raw = os.getenv(name)
    if raw is None or raw.strip() == "":
        return default
    try:
        return int(raw)
    except ValueError:
        raise ConfigurationError(f"{name} must be an integer, got '{raw}'")


def _read_float(name: str, default: float) -> float:
    raw = os.getenv(name)
    if raw is None or raw.strip() == "":
        return default
    try:
        return float(raw)
    except ValueError:
        raise ConfigurationError(f"{name} must be a number, got '{raw}'")


# Discretization
GRID_SIZE = _read_int("FDF_GRID_SIZE", 101)

# Estimation defaults
K0 = _read_int("FDF_K0", 8)
P_SHARE = _read_float("FDF_P_SHARE", 0.90)
P_MAX = _read_int("FDF_P_MAX", 12)
ALPHA_GATE = _read_float("FDF_ALPHA_GATE", 0.05)
LOW_SIGNAL_THRESHOLD = _read_float("FDF_LOW_SIGNAL", 1.0)

# Pre-tests
MC_REPS = _read_int("FDF_MC_REPS", 5000)
INDEPENDENCE_LAGS = _read_int("FDF_INDEPENDENCE_LAGS", 10)
PROJECTION_DIM = _read_int("FDF_PROJECTION_DIM", 3)

# Parallelism
WORKERS = _read_int("FDF_WORKERS", os.cpu_count() or 1)
BLAS_THREADS = _read_int("FDF_BLAS_THREADS", 1)

# Numerical thresholds
ZERO_EIGENVALUE = 1e-10
CLAMP_EIGENVALUE = 1e-12


if GRID_SIZE < 3:
    raise ConfigurationError(f"FDF_GRID_SIZE must be >= 3, got {GRID_SIZE}")

if K0 < 2:
    raise ConfigurationError(f"FDF_K0 must be >= 2, got {K0}")

if not 0.0 < P_SHARE < 1.0:
    raise ConfigurationError(f"FDF_P_SHARE must be in (0, 1), got {P_SHARE}")

if P_MAX < 1:
    raise ConfigurationError(f"FDF_P_MAX must be >= 1, got {P_MAX}")

if not 0.0 < ALPHA_GATE < 1.0:
    raise ConfigurationError(f"FDF_ALPHA_GATE must be in (0, 1), got {ALPHA_GATE}")

if MC_REPS < 100:
    raise ConfigurationError(f"FDF_MC_REPS must be >= 100, got {MC_REPS}")

if WORKERS < 1 or BLAS_THREADS < 1:
    raise ConfigurationError("FDF_WORKERS and FDF_BLAS_THREADS must be >= 1")


def validate_settings() -> dict:
    """
    Log the effective settings
    Call this at CLI startup so every run log records its configuration

    Returns:
        Dict of the effective settings
    """
    settings = {
        "grid_size": GRID_SIZE,
        "k0": K0,
        "p_share": P_SHARE,
        "p_max": P_MAX,
        "alpha_gate": ALPHA_GATE,
        "low_signal_threshold": LOW_SIGNAL_THRESHOLD,
        "mc_reps": MC_REPS,
        "independence_lags": INDEPENDENCE_LAGS,
        "projection_dim": PROJECTION_DIM,
        "workers": WORKERS,
        "blas_threads": BLAS_THREADS,
    }

    logger.info("Effective settings: " + ", ".join(f"{k}={v}" for k, v in settings.items()))
    return settings


if __name__ == "__main__":
    try:
        validate_settings()
    except ConfigurationError as e:
        print(f"Invalid configuration: {e}")
        sys.exit(1)
