"""Convergence checks for normalized log-likelihood-ratio sums after a change."""

import logging
from collections.abc import Sequence

import numpy as np
from numpy.typing import ArrayLike

from quickdetect.detection import ParameterError
from quickdetect.info import information_number
from quickdetect.models import ChangeModel
from quickdetect.montecarlo.types import Estimate
from quickdetect.simulation import Scenario, SimulationSettings, simulate_llr_sums

logger = logging.getLogger(__name__)


def slln_diagnostic(
    model: ChangeModel,
    theta: ArrayLike,
    change_point: int,
    ns: int | Sequence[int],
    epsilon: float,
    settings: SimulationSettings,
    info: float | None = None,
) -> dict[int, Estimate]:
    """Frequency of |Z^ν_{ν+n}(θ)/n - I_θ| > ε for every requested n.

    All n share the same replications, so the returned frequencies show how the deviation
    probability decays along one set of paths.
    """
    ns = [ns] if isinstance(ns, int) else sorted(set(ns))
    if not ns or ns[0] < 1:
        raise ParameterError(f"Every n must be >= 1, got {ns}")
    if not epsilon > 0.0:
        raise ParameterError(f"epsilon must be positive, got {epsilon}")
    theta = model.validate_theta(theta)
    rate = information_number(model, theta).value if info is None else info
    sums = simulate_llr_sums(Scenario.post_change(model, change_point, theta), theta, change_point, ns[-1], settings)
    result = {}
    for n in ns:
        exceed = np.abs(sums[:, n - 1] / n - rate) > epsilon
        result[n] = Estimate.from_sample(exceed.astype(float))
        logger.debug("n=%d: exceedance %.4g", n, result[n].mean)
    return result


def max_llr_diagnostic(
    model: ChangeModel,
    theta: ArrayLike,
    change_point: int,
    horizon: int,
    epsilon: float,
    settings: SimulationSettings,
    info: float | None = None,
) -> Estimate:
    """Frequency of (1/N) max_{1≤n≤N} Z^ν_{ν+n}(θ) >= (1 + ε) I_θ, with N = `horizon`."""
    if horizon < 1:
        raise ParameterError(f"horizon must be >= 1, got {horizon}")
    if not epsilon > 0.0:
        raise ParameterError(f"epsilon must be positive, got {epsilon}")
    theta = model.validate_theta(theta)
    rate = information_number(model, theta).value if info is None else info
    sums = simulate_llr_sums(Scenario.post_change(model, change_point, theta), theta, change_point, horizon, settings)
    exceed = sums.max(axis=1) / horizon >= (1.0 + epsilon) * rate
    return Estimate.from_sample(exceed.astype(float))
