import logging

import numpy as np
from numpy.typing import ArrayLike, NDArray

from quickdetect.models import UnstableModelError, spectral_radius

logger = logging.getLogger(__name__)

DEFAULT_TOLERANCE = 1e-14
DEFAULT_MAX_ITERATIONS = 200


def solve_stationary_covariance(
    A: ArrayLike, B: ArrayLike, tol: float = DEFAULT_TOLERANCE, max_iter: int = DEFAULT_MAX_ITERATIONS
) -> NDArray[np.float64]:
    """Solve F = A F Aᵀ + B by doubling.

    After k iterations F_k = Σ_{n < 2^k} Aⁿ B (Aᵀ)ⁿ, so convergence is quadratic in the spectral
    radius of A.

    Args:
        A: Square transition matrix with spectral radius below one.
        B: Symmetric positive semidefinite matrix of the same shape.
        tol: Stop once ‖F - A F Aᵀ - B‖_∞ <= tol · max(1, ‖F‖_∞).
        max_iter: Upper bound on doubling steps.

    Returns:
        The symmetric stationary covariance F.

    Raises:
        UnstableModelError: If the spectral radius of A is at least one.
        ValueError: If the shapes disagree.
    """
    A = np.atleast_2d(np.asarray(A, dtype=float))
    B = np.atleast_2d(np.asarray(B, dtype=float))
    if A.ndim != 2 or A.shape[0] != A.shape[1] or B.shape != A.shape:
        raise ValueError(f"Expected square matrices of equal shape, got {A.shape} and {B.shape}")
    radius = spectral_radius(A)
    if radius >= 1.0:
        raise UnstableModelError(f"Spectral radius {radius:.4g} >= 1, no stationary covariance")

    F = B.copy()
    power = A.copy()
    residual = np.inf
    for iteration in range(1, max_iter + 1):
        F = F + power @ F @ power.T
        power = power @ power
        residual = np.max(np.abs(F - A @ F @ A.T - B))
        if residual <= tol * max(1.0, np.max(np.abs(F))):
            logger.debug("Lyapunov doubling converged after %d iterations (residual %.3g)", iteration, residual)
            break
    else:
        logger.warning("Lyapunov doubling stopped after %d iterations with residual %.3g", max_iter, residual)
    return 0.5 * (F + F.T)
