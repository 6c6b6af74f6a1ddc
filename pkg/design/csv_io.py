"""
CSV ingestion and export of datasets
"""
import csv
import logging
import os
from typing import List, Optional, Sequence, Tuple

import numpy as np

from design.dataset import Dataset
from utils.errors import LengthMismatchError, NonNumericCellError, RaggedRowError

logger = logging.getLogger(__name__)


def _read_table(path: str, header: bool) -> Tuple[Optional[List[str]], np.ndarray]:
    """
    Read a rectangular numeric CSV

    Rows and columns in error messages are 1-based and count the header line.
    """
    names = None
    values: List[List[float]] = []
    width = None

    with open(path, newline='', encoding='utf-8') as f:
        reader = csv.reader(f)
        for line_no, row in enumerate(reader, start=1):
            if not row or all(cell.strip() == "" for cell in row):
                continue
            if header and names is None:
                names = [cell.strip() for cell in row]
                width = len(names)
                continue
            if width is None:
                width = len(row)
            elif len(row) != width:
                raise RaggedRowError(path, line_no, width, len(row))

            parsed = []
            for col_no, cell in enumerate(row, start=1):
                try:
                    parsed.append(float(cell))
                except ValueError:
                    raise NonNumericCellError(path, line_no, col_no, cell) from None
            values.append(parsed)

    table = np.array(values, dtype=float).reshape(len(values), width or 0)
    return names, table


def load_vector(path: str, header: bool = False) -> np.ndarray:
    """Single-column CSV as a vector (a single row is accepted too)"""
    _, table = _read_table(path, header)
    if table.ndim == 2 and table.shape[1] != 1 and table.shape[0] == 1:
        return table[0]
    if table.shape[1] != 1:
        raise RaggedRowError(path, 1, 1, table.shape[1])
    return table[:, 0]


def load_csv(x_path: str, y_path: Optional[str] = None, header: bool = False) -> Dataset:
    """
    Load a dataset from a matrix file and an optional response file

    Args:
        x_path: CSV with one row per observation
        y_path: CSV with one value per row
        header: Whether each file starts with a header row

    Returns:
        Dataset (column names retained when header=True)
    """
    names, X = _read_table(x_path, header)
    y = None
    if y_path is not None:
        y = load_vector(y_path, header)
        if y.shape[0] != X.shape[0]:
            raise LengthMismatchError(X.shape[0], y.shape[0])

    logger.info(f"Loaded {X.shape[0]}x{X.shape[1]} design from {x_path}")
    return Dataset(X=X, y=y, names=tuple(names) if names else None)


def _format(value: float) -> str:
    # repr is the shortest string that round-trips exactly
    return repr(float(value))


def save_vector(path: str, values: Sequence[float], name: Optional[str] = None) -> None:
    os.makedirs(os.path.dirname(os.path.abspath(path)), exist_ok=True)
    with open(path, 'w', newline='', encoding='utf-8') as f:
        writer = csv.writer(f, lineterminator='\n')
        if name is not None:
            writer.writerow([name])
        for value in values:
            writer.writerow([_format(value)])


def save_csv(ds: Dataset, x_path: str, y_path: Optional[str] = None, header: bool = False) -> None:
    """
    Write a dataset as a matrix file and (if present) a response file

    Args:
        ds: Dataset
        x_path: Output path of the matrix
        y_path: Output path of the response
        header: Write column names (x1..xp when the dataset has none)
    """
    os.makedirs(os.path.dirname(os.path.abspath(x_path)), exist_ok=True)
    with open(x_path, 'w', newline='', encoding='utf-8') as f:
        writer = csv.writer(f, lineterminator='\n')
        if header:
            writer.writerow(ds.names or [f"x{j + 1}" for j in range(ds.p)])
        for row in ds.X:
            writer.writerow([_format(v) for v in row])

    if y_path is not None:
        save_vector(y_path, ds.require_response(), name="y" if header else None)

    logger.info(f"Saved {ds.n}x{ds.p} design to {x_path}")
