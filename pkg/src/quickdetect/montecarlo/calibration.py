import logging

import numpy as np
from numpy.typing import NDArray

from quickdetect.detection import StoppingRule
from quickdetect.models import ChangeModel
from quickdetect.montecarlo.estimators import LcpfaForm, lcpfa_from_times
from quickdetect.montecarlo.types import CalibrationResult, LcpfaEstimate, LcpfaTarget
from quickdetect.simulation import Scenario, SimulationSettings, simulate_statistic_paths

logger = logging.getLogger(__name__)

DEFAULT_BRACKET = (0.0, 40.0)
DEFAULT_MAX_ITERATIONS = 60


class CalibrationError(RuntimeError):
    """Raised when the LCPFA target is not bracketed by the search interval."""
    pass


def first_passage_times(running_max: NDArray[np.float64], threshold: float) -> NDArray[np.int64]:
    """First n with statistic >= threshold per row of running maxima; 0 where it never crosses."""
    crossed = running_max >= threshold
    return np.where(crossed.any(axis=1), np.argmax(crossed, axis=1) + 1, 0).astype(np.int64)


def calibrate_threshold(
    rule: StoppingRule,
    model: ChangeModel,
    target: LcpfaTarget,
    settings: SimulationSettings,
    *,
    bracket: tuple[float, float] = DEFAULT_BRACKET,
    max_iter: int = DEFAULT_MAX_ITERATIONS,
    form: LcpfaForm = "bound",
) -> CalibrationResult:
    """Bisect on the threshold until the estimated LCPFA is within tolerance of β.

    Pre-change statistic paths are simulated once; every candidate threshold is evaluated on the
    same paths, so the LCPFA estimate is nonincreasing in the threshold. The search stops when
    |estimate - β| <= max(2·SE, 0.05·β). If the iteration budget runs out, the upper end of the
    final bracket (whose LCPFA does not exceed β) is returned with `converged=False`.

    Args:
        rule: Rule whose statistic is calibrated; its own threshold is ignored.
        model: Pre-change model.
        target: β with the span ℓ and window m of the constraint.
        settings: Replication count, seed and workers.
        bracket: Search interval for the threshold, in nats.
        max_iter: Bisection steps before giving up.
        form: LCPFA estimator form.

    Raises:
        CalibrationError: If the target is not bracketed.
    """
    horizon = target.ell + target.m - 1
    paths = simulate_statistic_paths(rule, Scenario.pre_change(model), horizon, settings)
    running_max = np.maximum.accumulate(paths, axis=1)

    def lcpfa_at(threshold: float) -> LcpfaEstimate:
        return lcpfa_from_times(first_passage_times(running_max, threshold), target.ell, target.m, form)

    low, high = bracket
    at_low, at_high = lcpfa_at(low), lcpfa_at(high)
    if at_low.mean < target.beta or at_high.mean > target.beta:
        raise CalibrationError(
            f"LCPFA target {target.beta} not bracketed by [{low}, {high}] nats "
            f"(estimates {at_low.mean:.4g} and {at_high.mean:.4g})"
        )

    for iteration in range(1, max_iter + 1):
        middle = 0.5 * (low + high)
        estimate = lcpfa_at(middle)
        logger.debug("Calibration step %d: a=%.6f lcpfa=%.5g", iteration, middle, estimate.mean)
        if abs(estimate.mean - target.beta) <= max(2 * estimate.std_error, 0.05 * target.beta):
            return CalibrationResult(
                threshold=middle, achieved=estimate, target=target, iterations=iteration, converged=True
            )
        if estimate.mean > target.beta:
            low = middle
        else:
            high, at_high = middle, estimate

    logger.warning("Calibration did not reach tolerance in %d steps; returning a=%.6f", max_iter, high)
    return CalibrationResult(threshold=high, achieved=at_high, target=target, iterations=max_iter, converged=False)
