"""
Dataset Ingestion
Wide-format curve CSV files: header `s,<p_1>,...,<p_q>`, then one row
`<n>,<v_1>,...,<v_q>` per curve
"""

import hashlib
from pathlib import Path
from typing import NamedTuple, Optional, Sequence

import numpy as np
import pandas as pd

from utils.errors import ParseError, SchemaError
from utils.logger import get_logger

logger = get_logger(__name__)

INDEX_COLUMN = "s"


class WideDataset(NamedTuple):
    points: np.ndarray
    labels: list
    values: np.ndarray


def file_digest(path) -> str:
    """SHA-256 hex digest of a file"""
    digest = hashlib.sha256()
    with open(path, "rb") as f:
        for chunk in iter(lambda: f.read(1 << 16), b""):
            digest.update(chunk)
    return digest.hexdigest()


def read_wide_csv(path) -> WideDataset:
    """
    Read a wide-format curve file

    Args:
        path: CSV path

    Returns:
        WideDataset(points q-vector, row labels, values N x q)

    Raises:
        FileNotFoundError: path does not exist
        ParseError: empty file, ragged rows or non-numeric cells (row/column are 1-based file positions)
        SchemaError: header is not `s` followed by increasing numeric points
    """
    path = Path(path)
    if not path.exists():
        raise FileNotFoundError(f"Input file not found: {path}")

    try:
        frame = pd.read_csv(path, dtype=str, keep_default_na=False, encoding="utf-8")
    except pd.errors.EmptyDataError:
        raise ParseError(f"{path} is empty", row=1)
    except pd.errors.ParserError as e:
        raise ParseError(f"{path} is not a well-formed CSV file: {e}")
    except UnicodeDecodeError as e:
        raise ParseError(f"{path} is not UTF-8 encoded: {e}")

    header = [str(name).strip() for name in frame.columns]
    if not header or header[0] != INDEX_COLUMN:
        raise SchemaError(f"first header field must be '{INDEX_COLUMN}', got '{header[0] if header else ''}'")
    if len(header) < 2:
        raise SchemaError("header lists no observation points")

    try:
        points = np.array([float(name) for name in header[1:]])
    except ValueError:
        raise SchemaError(f"observation points in the header must be numbers: {header[1:]}")
    if not np.all(np.isfinite(points)) or not np.all(np.diff(points) > 0):
        raise SchemaError("observation points must be finite and strictly increasing")

    if frame.empty:
        raise ParseError(f"{path} has a header but no data rows", row=2)

    raw = frame.iloc[:, 1:].to_numpy()
    values = np.empty(raw.shape)
    for i, row in enumerate(raw):
        for j, cell in enumerate(row):
            try:
                values[i, j] = float(cell)
            except ValueError:
                raise ParseError(f"non-numeric value '{cell}'", row=i + 2, column=j + 2)
            if not np.isfinite(values[i, j]):
                raise ParseError(f"non-finite value '{cell}'", row=i + 2, column=j + 2)

    labels = [str(label) for label in frame.iloc[:, 0]]
    logger.info(f"Read {values.shape[0]} curves at {values.shape[1]} observation points from {path}")
    return WideDataset(points=points, labels=labels, values=values)


def write_wide_csv(
    path,
    points: Sequence[float],
    values,
    labels: Optional[Sequence] = None
):
    """Write curves in the wide format read by read_wide_csv"""
    values = np.atleast_2d(np.asarray(values, dtype=float))
    if labels is None:
        labels = range(1, values.shape[0] + 1)
    frame = pd.DataFrame(values, columns=[repr(float(p)) for p in points])
    frame.insert(0, INDEX_COLUMN, list(labels))
    frame.to_csv(path, index=False, lineterminator="\n", float_format="%.17g")
