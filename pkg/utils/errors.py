"""
Exception hierarchy for the Hadamard sparse regression toolkit
"""
from typing import Any, Dict, Optional

import numpy as np


class HadamardError(Exception):
    """Base class for all toolkit errors"""

    def to_dict(self) -> Dict[str, Any]:
        """Machine-readable form used by the CLI error channel"""
        payload = {"error": type(self).__name__, "message": str(self)}
        payload.update(self._details())
        return payload

    def _details(self) -> Dict[str, Any]:
        return {}


class ConfigurationError(HadamardError, ValueError):
    """Invalid hyper-parameters, covariance parameters, rules or flags"""


class DegenerateInputError(HadamardError, ValueError):
    """Input that makes an operation ill-defined (zero column, empty split)"""

    def __init__(self, message: str, index: Optional[int] = None):
        super().__init__(message)
        self.index = index

    def _details(self) -> Dict[str, Any]:
        return {"index": self.index}


class DimensionMismatchError(HadamardError, ValueError):
    """Arrays whose shapes do not agree"""


class DivergenceError(HadamardError, ArithmeticError):
    """Gradient iterates left the finite range or blew up"""

    def __init__(self, t: int, max_abs: float, last_beta: Optional[np.ndarray] = None):
        super().__init__(f"iterates diverged at t={t} (max |component| = {max_abs:.3e})")
        self.t = t
        self.max_abs = max_abs
        self.last_beta = last_beta

    def _details(self) -> Dict[str, Any]:
        return {"t": self.t, "max_abs": self.max_abs}


class SizeGuardError(HadamardError, ValueError):
    """Problem too large for a dense computation"""

    def __init__(self, what: str, size: int, limit: int, suggestion: str = ""):
        message = f"{what} = {size} exceeds the guard of {limit}"
        if suggestion:
            message += f"; {suggestion}"
        super().__init__(message)
        self.size = size
        self.limit = limit

    def _details(self) -> Dict[str, Any]:
        return {"size": self.size, "limit": self.limit}


class CsvFormatError(HadamardError, ValueError):
    """Malformed CSV input"""


class RaggedRowError(CsvFormatError):
    def __init__(self, path: str, row: int, expected: int, found: int):
        super().__init__(f"{path}: row {row} has {found} fields, expected {expected}")
        self.path = path
        self.row = row
        self.expected = expected
        self.found = found

    def _details(self) -> Dict[str, Any]:
        return {"path": self.path, "row": self.row, "expected": self.expected, "found": self.found}


class NonNumericCellError(CsvFormatError):
    def __init__(self, path: str, row: int, column: int, cell: str):
        super().__init__(f"{path}: row {row}, column {column}: non-numeric cell {cell!r}")
        self.path = path
        self.row = row
        self.column = column
        self.cell = cell

    def _details(self) -> Dict[str, Any]:
        return {"path": self.path, "row": self.row, "column": self.column, "cell": self.cell}


class LengthMismatchError(CsvFormatError, DimensionMismatchError):
    def __init__(self, n_x: int, n_y: int):
        super().__init__(f"design has {n_x} rows but response has {n_y} entries")
        self.n_x = n_x
        self.n_y = n_y

    def _details(self) -> Dict[str, Any]:
        return {"n_x": self.n_x, "n_y": self.n_y}


class ExperimentFailedError(HadamardError, RuntimeError):
    """Too many replications of an experiment failed"""

    def __init__(self, method: str, failed: int, total: int):
        super().__init__(f"{method}: {failed}/{total} replications failed")
        self.method = method
        self.failed = failed
        self.total = total

    def _details(self) -> Dict[str, Any]:
        return {"method": self.method, "failed": self.failed, "total": self.total}
