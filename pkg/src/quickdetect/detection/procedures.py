import dataclasses
import logging
import math
from collections.abc import Iterable
from dataclasses import dataclass
from enum import Enum
from typing import NamedTuple

import numpy as np
from numpy.typing import ArrayLike, NDArray
from scipy.special import logsumexp

from quickdetect.detection.statistics import DetectorState, step
from quickdetect.detection.thresholds import ParameterError, ScheduleParams
from quickdetect.models import ChangeModel, ParameterGrid

logger = logging.getLogger(__name__)


class RuleKind(str, Enum):
    WSR = "wsr"
    SR = "sr"


@dataclass(frozen=True, eq=False)
class StoppingRule:
    """Stop at the first n with log statistic >= threshold.

    A WSR rule mixes the SR statistics of every grid point; an SR rule is tuned to a single
    parameter and its grid is the singleton {θ}.
    """

    kind: RuleKind
    grid: ParameterGrid
    threshold: float

    def __post_init__(self) -> None:
        if not math.isfinite(self.threshold):
            raise ParameterError(f"Threshold must be finite, got {self.threshold}")
        if self.kind is RuleKind.SR and self.grid.size != 1:
            raise ParameterError(f"An SR rule is tuned to one parameter, got a grid of {self.grid.size}")

    @classmethod
    def wsr(cls, grid: ParameterGrid, a: float) -> "StoppingRule":
        return cls(kind=RuleKind.WSR, grid=grid, threshold=float(a))

    @classmethod
    def sr(cls, theta: ArrayLike, log_b: float) -> "StoppingRule":
        return cls(kind=RuleKind.SR, grid=ParameterGrid.singleton(theta), threshold=float(log_b))

    @classmethod
    def for_schedule(cls, grid: ParameterGrid, params: ScheduleParams) -> "StoppingRule":
        """The WSR rule with threshold a_β, which belongs to the LCPFA class (β, ℓ_β, m_β)."""
        return cls.wsr(grid, params.a_beta)

    def with_threshold(self, threshold: float) -> "StoppingRule":
        return dataclasses.replace(self, threshold=float(threshold))

    @property
    def label(self) -> str:
        return self.kind.value

    def statistic(self, log_r: NDArray[np.float64]) -> NDArray[np.float64]:
        """Log detection statistic from per-point log SR statistics of shape (..., N)."""
        if self.kind is RuleKind.SR:
            return log_r[..., 0]
        return logsumexp(log_r + self.grid.log_weights, axis=-1)


class RuleOutcome(NamedTuple):
    """Result of running a stopping rule over a stream.

    Attributes:
        stopped: Whether the statistic crossed the threshold.
        time: The stopping time τ when stopped, otherwise the number of observations consumed.
        statistic: Log statistic at `time`.
        trace: Detector states after every observation when trace recording was requested.
    """

    stopped: bool
    time: int
    statistic: float
    trace: list[DetectorState] | None


def run_rule(
    rule: StoppingRule,
    model: ChangeModel,
    observations: Iterable[ArrayLike],
    *,
    horizon: int | None = None,
    history: ArrayLike | None = None,
    record_trace: bool = False,
) -> RuleOutcome:
    """Feed observations to the rule until it stops, the stream ends, or `horizon` observations pass.

    Args:
        rule: Stopping rule to run.
        model: Model supplying likelihood-ratio increments.
        observations: Any iterable of observations X_1, X_2, ...; generators are consumed lazily.
        horizon: Optional cap on the number of observations consumed.
        history: Initial state vector Φ_0 (defaults to zeros).
        record_trace: Keep every intermediate DetectorState.

    Returns:
        A RuleOutcome; a stream that never crosses is a normal outcome with `stopped=False`.
    """
    if horizon is not None and horizon < 1:
        raise ParameterError(f"horizon must be >= 1, got {horizon}")
    state = DetectorState.initial(rule.grid)
    phi = model.initial_history() if history is None else np.asarray(history, dtype=float)
    trace: list[DetectorState] | None = [] if record_trace else None
    statistic = -math.inf
    for x in observations:
        x = np.asarray(x, dtype=float)
        state = step(state, model, rule.grid, x, phi)
        phi = model.push_history(phi, x)
        statistic = float(rule.statistic(state.log_r))
        if trace is not None:
            trace.append(state)
        if statistic >= rule.threshold:
            return RuleOutcome(stopped=True, time=state.n, statistic=statistic, trace=trace)
        if horizon is not None and state.n >= horizon:
            break
    logger.debug("Rule %s did not stop within %d observations", rule.label, state.n)
    return RuleOutcome(stopped=False, time=state.n, statistic=statistic, trace=trace)
