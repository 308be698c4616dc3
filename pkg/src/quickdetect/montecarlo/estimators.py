"""
Operating characteristics of stopping rules estimated by simulation.

Every estimator draws replication i from the stream seeded by (settings.seed, i), so estimators
called with the same settings see common random numbers.
"""

import logging
import math
from collections.abc import Sequence
from typing import Literal

import numpy as np
from numpy.typing import ArrayLike, NDArray

from quickdetect.detection import ParameterError, StoppingRule
from quickdetect.info import default_delay_cap
from quickdetect.models import ChangeModel
from quickdetect.montecarlo.types import Z_95, Estimate, LcpfaEstimate, MaxRiskEstimate
from quickdetect.simulation import Scenario, SimulationSettings, simulate_statistic_paths, simulate_stopping_times

logger = logging.getLogger(__name__)

CENSOR_WARNING_RATE = 1e-3
PFA_TAIL_BOUND = 1e-4

LcpfaForm = Literal["bound", "exact"]


class EstimationError(RuntimeError):
    """Raised when no replication is usable for an estimate."""
    pass


def delay_horizon(rule: StoppingRule, model: ChangeModel, change_point: int, settings: SimulationSettings) -> int:
    cap = settings.delay_cap if settings.delay_cap is not None else default_delay_cap(rule, model)
    return change_point + cap


def moment_from_times(times: NDArray[np.int64], change_point: int, r: float) -> Estimate:
    """Conditional moment E[(τ - ν)^r | τ > ν] from simulated stopping times (0 = censored)."""
    stopped = times > 0
    used = stopped & (times > change_point)
    censor_rate = float(np.mean(~stopped))
    discard_rate = float(np.mean(stopped & (times <= change_point)))
    if censor_rate > CENSOR_WARNING_RATE:
        logger.warning(
            "%.3f%% of replications reached the delay cap and were excluded; raise delay_cap", 100 * censor_rate
        )
    if not used.any():
        raise EstimationError(f"No replication stopped after the change point {change_point}")
    delays = (times[used] - change_point).astype(float)
    return Estimate.from_sample(delays**r, censor_rate=censor_rate, discard_rate=discard_rate)


def estimate_moment_risk(
    rule: StoppingRule,
    model: ChangeModel,
    theta: ArrayLike,
    change_point: int,
    r: float,
    settings: SimulationSettings,
) -> Estimate:
    """R^r_{ν,θ} = E_{ν,θ}[(τ - ν)^r | τ > ν].

    Replications that stop at or before ν are discarded and counted in `discard_rate`; replications
    that reach the delay cap are excluded and counted in `censor_rate`.

    Raises:
        EstimationError: If no replication stops after the change point.
    """
    if r < 1:
        raise ParameterError(f"Moment order must be >= 1, got {r}")
    scenario = Scenario.post_change(model, change_point, theta)
    horizon = delay_horizon(rule, model, change_point, settings)
    times = simulate_stopping_times(rule, scenario, horizon, settings)[:, 0]
    return moment_from_times(times, change_point, r)


def estimate_add(
    rule: StoppingRule, model: ChangeModel, theta: ArrayLike, change_point: int, settings: SimulationSettings
) -> Estimate:
    """Average delay to detection ADD_{ν,θ} = E_{ν,θ}[τ - ν | τ > ν]."""
    return estimate_moment_risk(rule, model, theta, change_point, 1, settings)


def estimate_max_risk(
    rule: StoppingRule,
    model: ChangeModel,
    theta: ArrayLike,
    change_points: Sequence[int],
    r: float,
    settings: SimulationSettings,
) -> MaxRiskEstimate:
    """max over the given change points of R^r_{ν,θ}, with the worst ν."""
    if not change_points:
        raise ParameterError("At least one change point is required")
    by_change_point = {nu: estimate_moment_risk(rule, model, theta, nu, r, settings) for nu in change_points}
    worst = max(by_change_point, key=lambda nu: by_change_point[nu].mean)
    return MaxRiskEstimate(change_point=worst, estimate=by_change_point[worst], by_change_point=by_change_point)


def lcpfa_from_times(times: NDArray[np.int64], ell: int, m: int, form: LcpfaForm = "bound") -> LcpfaEstimate:
    """max over k ≤ ℓ of the conditional false-alarm frequency in the window [k, k + m).

    The "bound" form counts #{τ < k + m} / #{τ ≥ k}, clipped at 1 since stops before k enter only
    the numerator; the "exact" form counts #{k ≤ τ < k + m} / #{τ ≥ k}. Both agree at k = 1. Times
    of 0 mean no stop within ℓ + m - 1.
    """
    horizon = ell + m - 1
    stops = np.sort(np.where(times > 0, times, horizon + 1))
    total = stops.shape[0]
    ks = np.arange(1, ell + 1)
    before_k = np.searchsorted(stops, ks, side="left")
    before_window_end = np.searchsorted(stops, ks + m, side="left")
    at_risk = total - before_k
    alarms = before_window_end if form == "bound" else before_window_end - before_k
    valid = at_risk > 0
    if not valid.any():
        raise EstimationError("Every replication stopped before the first window")
    ratios = np.where(valid, alarms / np.maximum(at_risk, 1), -np.inf)
    worst = int(np.argmax(ratios))
    p = min(float(ratios[worst]), 1.0)
    n = int(at_risk[worst])
    std_error = math.sqrt(p * (1.0 - p) / n)
    return LcpfaEstimate(
        mean=p,
        std_error=std_error,
        ci95=(max(0.0, p - Z_95 * std_error), min(1.0, p + Z_95 * std_error)),
        n_used=n,
        censor_rate=float(np.mean(times == 0)),
        worst_k=worst + 1,
    )


def estimate_lcpfa(
    rule: StoppingRule,
    model: ChangeModel,
    ell: int,
    m: int,
    settings: SimulationSettings,
    form: LcpfaForm = "bound",
) -> LcpfaEstimate:
    """sup_{1≤k≤ℓ} P_∞(τ < k + m | τ ≥ k) from pre-change runs of length ℓ + m - 1.

    The standard error is the binomial one at the maximizing k.
    """
    if ell < 1 or m < 1:
        raise ParameterError(f"Need ell >= 1 and m >= 1, got ell={ell}, m={m}")
    times = simulate_stopping_times(rule, Scenario.pre_change(model), ell + m - 1, settings)[:, 0]
    return lcpfa_from_times(times, ell, m, form)


def pfa_truncation(rho: float, tail_bound: float = PFA_TAIL_BOUND) -> int:
    """Smallest K >= 1 with (1 - ρ)^{K+1} <= tail_bound."""
    return max(1, math.ceil(math.log(tail_bound) / math.log1p(-rho)) - 1)


def estimate_weighted_pfa(
    rule: StoppingRule, model: ChangeModel, rho: float, settings: SimulationSettings
) -> Estimate:
    """Σ_{k≥1} ρ(1 - ρ)^k P_∞(τ ≤ k) under a geometric change-point prior.

    The sum is truncated at K with (1 - ρ)^{K+1} <= 1e-4 and that tail mass is added to the upper
    confidence limit. Each replication contributes Σ_{k=τ}^{K} ρ(1 - ρ)^k.
    """
    if not 0.0 < rho < 1.0:
        raise ParameterError(f"Geometric prior parameter must be in (0, 1), got {rho}")
    horizon = pfa_truncation(rho)
    times = simulate_stopping_times(rule, Scenario.pre_change(model), horizon, settings)[:, 0].astype(float)
    tail = math.exp((horizon + 1) * math.log1p(-rho))
    contributions = np.where(times > 0, np.exp(times * math.log1p(-rho)) - tail, 0.0)
    estimate = Estimate.from_sample(contributions, censor_rate=float(np.mean(times == 0)))
    low, high = estimate.ci95
    return estimate.model_copy(update={"ci95": (low, high + tail)})


def estimate_statistic_mean(rule: StoppingRule, model: ChangeModel, n: int, settings: SimulationSettings) -> Estimate:
    """E_∞ of the raw detection statistic after n observations (equal to n for the mixture)."""
    if n < 1:
        raise ParameterError(f"n must be >= 1, got {n}")
    paths = simulate_statistic_paths(rule, Scenario.pre_change(model), n, settings)
    return Estimate.from_sample(np.exp(paths[:, n - 1]))
