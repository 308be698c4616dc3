"""
Log-domain Shiryaev-Roberts statistics.

Raw SR statistics grow like exp(n·I) after a change, so every quantity here is the natural logarithm
of its raw counterpart. R_0 = 0 is encoded by -inf.
"""

import csv
import logging
from collections.abc import Sequence
from dataclasses import dataclass
from pathlib import Path

import numpy as np
from numpy.typing import ArrayLike, NDArray
from scipy.special import logsumexp

from quickdetect.models import ChangeModel, ParameterGrid, StateError

logger = logging.getLogger(__name__)


def sr_update(log_r_prev: ArrayLike, llr: ArrayLike) -> NDArray[np.float64] | float:
    """log R_{n+1} = log(1 + R_n) + log L_{n+1}, elementwise.

    `np.logaddexp(0, x)` evaluates log1p(exp(x)) without overflow for large x and returns exactly 0
    for x = -inf.
    """
    result = np.logaddexp(0.0, log_r_prev) + llr
    return float(result) if np.ndim(result) == 0 else result


def wsr_mix(log_r: ArrayLike, weights: ArrayLike) -> NDArray[np.float64] | float:
    """log Σ_j w_j R(θ_j) over the last axis, computed as a max-shifted log-sum-exp.

    Returns -inf exactly when every entry of `log_r` is -inf.

    Raises:
        ValueError: If the last dimensions of the two arguments differ.
    """
    log_r = np.asarray(log_r, dtype=float)
    weights = np.asarray(weights, dtype=float)
    if log_r.shape[-1] != weights.shape[-1]:
        raise ValueError(f"Got {log_r.shape[-1]} statistics for {weights.shape[-1]} weights")
    result = logsumexp(log_r + np.log(weights), axis=-1)
    return float(result) if np.ndim(result) == 0 else result


@dataclass(frozen=True, eq=False)
class DetectorState:
    """Per-grid-point log SR statistics after n observations.

    Attributes:
        log_r: log R_n(θ_j) for every grid point.
        n: Number of observations processed.
        log_wsr: log R_n^W, the weighted mixture of `log_r`.
    """

    log_r: NDArray[np.float64]
    n: int
    log_wsr: float

    @classmethod
    def initial(cls, grid: ParameterGrid) -> "DetectorState":
        return cls(log_r=np.full(grid.size, -np.inf), n=0, log_wsr=-np.inf)


def step(
    state: DetectorState, model: ChangeModel, grid: ParameterGrid, x_new: ArrayLike, history: ArrayLike
) -> DetectorState:
    """Advance every SR statistic of the grid by one observation and remix.

    Args:
        state: Detector state after n observations.
        model: Model supplying the log-likelihood-ratio increments.
        grid: Weighted post-change parameter grid.
        x_new: Observation X_{n+1}.
        history: State vector Φ_n (most recent observations, newest first).

    Raises:
        StateError: If the history is shorter than the model's memory.
    """
    x = np.atleast_1d(np.asarray(x_new, dtype=float)).reshape(1, model.obs_dim)
    history = np.atleast_1d(np.asarray(history, dtype=float)).ravel()
    if history.shape[0] < model.state_dim:
        raise StateError(f"History holds {history.shape[0]} values, model needs {model.state_dim}")
    phi = history[: model.state_dim].reshape(1, model.state_dim)
    increments = model.llr(grid.points, x, phi)[0]
    log_r = sr_update(state.log_r, increments)
    return DetectorState(log_r=log_r, n=state.n + 1, log_wsr=wsr_mix(log_r, grid.weights))


def write_trace_csv(path: Path, states: Sequence[DetectorState], grid: ParameterGrid) -> None:
    """Write one row per detector state: n, log_wsr, log_r_1, ..., log_r_N."""
    with path.open("w", newline="") as f:
        writer = csv.writer(f)
        writer.writerow(["n", "log_wsr", *(f"log_r_{j + 1}" for j in range(grid.size))])
        for state in states:
            writer.writerow([state.n, repr(state.log_wsr), *(repr(float(v)) for v in state.log_r)])
    logger.debug("Wrote %d trace rows to %s", len(states), path)
