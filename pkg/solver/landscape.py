"""
Local geometry of f(g, l) = (2n)^-1 ||X (g * l) - y||^2
"""
from dataclasses import dataclass
from typing import Any, Dict, Tuple
import logging

import numpy as np

from config.solver_config import LANDSCAPE_MAX_P
from design.dataset import Dataset
from utils.errors import DimensionMismatchError, SizeGuardError

logger = logging.getLogger(__name__)

STATIONARY_TOL = 1e-8


@dataclass(frozen=True)
class LandscapeReport:
    grad_norm: float
    is_stationary: bool
    min_hessian_eig: float

    def to_dict(self) -> Dict[str, Any]:
        return {
            "grad_norm": self.grad_norm,
            "is_stationary": self.is_stationary,
            "min_hessian_eig": self.min_hessian_eig,
        }


def loss(ds: Dataset, g: np.ndarray, l: np.ndarray) -> float:
    residual = ds.X @ (g * l) - ds.require_response()
    return float(residual @ residual) / (2.0 * ds.n)


def gradient(ds: Dataset, g: np.ndarray, l: np.ndarray) -> Tuple[np.ndarray, np.ndarray]:
    """(df/dg, df/dl) = (l * c, g * c) with c = X^T r / n"""
    c = ds.X.T @ (ds.X @ (g * l) - ds.require_response()) / ds.n
    return l * c, g * c


def hessian(ds: Dataset, g: np.ndarray, l: np.ndarray) -> np.ndarray:
    """
    Dense 2p x 2p Hessian in the (g, l) ordering

    With A = X Diag(l), B = X Diag(g) and c = X^T r / n:
    [[A^T A / n, A^T B / n + Diag(c)], [B^T A / n + Diag(c), B^T B / n]]
    """
    c = ds.X.T @ (ds.X @ (g * l) - ds.require_response()) / ds.n
    A = ds.X * l
    B = ds.X * g
    cross = A.T @ B / ds.n + np.diag(c)
    return np.block([
        [A.T @ A / ds.n, cross],
        [cross.T, B.T @ B / ds.n],
    ])


def landscape_probe(ds: Dataset, g: np.ndarray, l: np.ndarray,
                    tol: float = STATIONARY_TOL) -> LandscapeReport:
    """
    Gradient norm, stationarity and smallest Hessian eigenvalue at (g, l)

    Args:
        ds: Dataset with response
        g: First factor
        l: Second factor
        tol: Stationarity threshold on the gradient norm

    Returns:
        LandscapeReport

    Raises:
        SizeGuardError: if p exceeds LANDSCAPE_MAX_P
    """
    g = np.asarray(g, dtype=float)
    l = np.asarray(l, dtype=float)
    if g.shape != (ds.p,) or l.shape != (ds.p,):
        raise DimensionMismatchError(f"point must have two factors of length {ds.p}")
    if ds.p > LANDSCAPE_MAX_P:
        raise SizeGuardError("p", ds.p, LANDSCAPE_MAX_P, "the Hessian would not fit a dense eigensolver")

    grad_g, grad_l = gradient(ds, g, l)
    grad_norm = float(np.sqrt(grad_g @ grad_g + grad_l @ grad_l))
    min_eig = float(np.linalg.eigvalsh(hessian(ds, g, l))[0])

    logger.debug(f"Landscape probe: |grad| = {grad_norm:.3e}, min eig = {min_eig:.3e}")
    return LandscapeReport(
        grad_norm=grad_norm,
        is_stationary=grad_norm <= tol,
        min_hessian_eig=min_eig,
    )
