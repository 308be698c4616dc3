import logging
import math
from enum import Enum

import numpy as np
from numpy.typing import ArrayLike
from pydantic import BaseModel, ConfigDict, Field, model_validator

from quickdetect.detection import StoppingRule
from quickdetect.info.lyapunov import solve_stationary_covariance
from quickdetect.models import (
    ArGaussianModel,
    ChangeModel,
    IidGaussianShiftModel,
    companion_matrix,
)
from quickdetect.simulation import Scenario, SimulationSettings, simulate_llr_sums

logger = logging.getLogger(__name__)

DEFAULT_BURN_IN = 1000
MIN_DELAY_CAP = 100
DELAY_CAP_FACTOR = 50


class DegenerateParameterError(ValueError):
    """Raised when a delay approximation needs a positive information number and gets none."""
    pass


class InfoMethod(str, Enum):
    CLOSED_FORM = "closed-form"
    LYAPUNOV = "lyapunov"
    EMPIRICAL = "empirical"


class InfoResult(BaseModel):
    """Information number I_θ in nats per observation."""

    model_config = ConfigDict(frozen=True)

    value: float
    method: InfoMethod
    std_error: float = Field(default=0.0, ge=0.0)

    @model_validator(mode="after")
    def _check_analytic(self) -> "InfoResult":
        if self.method is not InfoMethod.EMPIRICAL:
            if self.value < 0.0:
                raise ValueError(f"Analytic information number must be nonnegative, got {self.value}")
            if self.std_error != 0.0:
                raise ValueError("Analytic information numbers carry no standard error")
        return self


def info_number_ar(
    theta: ArrayLike, a: ArrayLike, method: InfoMethod | str = InfoMethod.LYAPUNOV
) -> InfoResult:
    """I_θ = ½ (θ - a)ᵀ F(θ) (θ - a) for a change of AR(p) coefficients from `a` to θ.

    F(θ) is the post-change stationary covariance of (X_n, ..., X_{n-p+1}). With
    `method="closed-form"` (AR(1) only) this is (θ - a)² / (2 (1 - θ²)).

    Raises:
        UnstableModelError: If either coefficient vector is not stationary.
    """
    method = InfoMethod(method)
    theta = ArGaussianModel(a).validate_theta(theta)
    shift = theta - np.atleast_1d(np.asarray(a, dtype=float))
    if method is InfoMethod.CLOSED_FORM:
        if theta.shape[0] != 1:
            raise ValueError(f"The closed form covers AR(1) only, got order {theta.shape[0]}")
        value = float(shift[0] ** 2 / (2.0 * (1.0 - theta[0] ** 2)))
    elif method is InfoMethod.LYAPUNOV:
        innovation = np.zeros((theta.shape[0], theta.shape[0]))
        innovation[0, 0] = 1.0
        covariance = solve_stationary_covariance(companion_matrix(theta), innovation)
        value = float(0.5 * shift @ covariance @ shift)
    else:
        raise ValueError(f"Use info_number_empirical for method {method.value!r}")
    return InfoResult(value=value, method=method)


def info_number_iid(theta: ArrayLike, mu: ArrayLike) -> InfoResult:
    """I_θ = |θ - μ|² / 2 for a mean shift of unit-covariance Gaussian data."""
    shift = np.atleast_1d(np.asarray(theta, dtype=float)) - np.atleast_1d(np.asarray(mu, dtype=float))
    return InfoResult(value=float(0.5 * shift @ shift), method=InfoMethod.CLOSED_FORM)


def info_number_empirical(
    model: ChangeModel,
    theta: ArrayLike,
    burn_in: int = DEFAULT_BURN_IN,
    n: int = 1000,
    reps: int = 200,
    seed: int = 0,
    workers: int | None = None,
) -> InfoResult:
    """Batch-means estimate of the ergodic mean of the LLR increment under the θ regime.

    Every replication runs θ-dynamics from the first observation, discards `burn_in` steps and
    averages the next `n` increments. The estimate is the mean over replications; the standard
    error comes from their spread.
    """
    if n < 1:
        raise ValueError(f"n must be >= 1, got {n}")
    if reps < 2:
        raise ValueError(f"reps must be >= 2, got {reps}")
    if burn_in < 0:
        raise ValueError(f"burn_in must be >= 0, got {burn_in}")
    theta = model.validate_theta(theta)
    settings = SimulationSettings(replications=reps, seed=seed, workers=workers)
    sums = simulate_llr_sums(Scenario.post_change(model, 0, theta), theta, burn_in, n, settings)
    rates = sums[:, -1] / n
    return InfoResult(
        value=float(rates.mean()),
        method=InfoMethod.EMPIRICAL,
        std_error=float(rates.std(ddof=1) / math.sqrt(reps)),
    )


def information_number(model: ChangeModel, theta: ArrayLike, **empirical_options) -> InfoResult:
    """I_θ by the most exact method the model family supports.

    i.i.d. shifts and AR(1) use the closed form, AR(p) the Lyapunov solver, and any other model
    the empirical estimator (with `empirical_options` forwarded to it).
    """
    if isinstance(model, IidGaussianShiftModel):
        return info_number_iid(model.validate_theta(theta), model.mu)
    if isinstance(model, ArGaussianModel):
        method = InfoMethod.CLOSED_FORM if model.order == 1 else InfoMethod.LYAPUNOV
        return info_number_ar(theta, model.a, method)
    return info_number_empirical(model, theta, **empirical_options)


def first_order_risk(a: float, info: float | InfoResult, r: float = 1.0) -> float:
    """First-order approximation (a / I_θ)^r of the r-th delay moment at threshold a.

    Raises:
        DegenerateParameterError: If the information number is not positive.
    """
    value = info.value if isinstance(info, InfoResult) else float(info)
    if not value > 0.0:
        raise DegenerateParameterError(f"Information number must be positive, got {value}")
    if not a > 0.0:
        raise ValueError(f"Threshold must be positive, got {a}")
    if r < 1.0:
        raise ValueError(f"Moment order must be >= 1, got {r}")
    return (a / value) ** r


def default_delay_cap(rule: StoppingRule, model: ChangeModel, info_min: float | None = None) -> int:
    """Post-change horizon ⌈50 · max(a, 1) / I_min⌉ (at least 100), I_min over the rule's grid."""
    if info_min is None:
        info_min = min(
            information_number(model, point, burn_in=200, n=200, reps=50).value for point in rule.grid.points
        )
    if not info_min > 0.0:
        raise DegenerateParameterError(f"Smallest grid information number must be positive, got {info_min}")
    return max(MIN_DELAY_CAP, math.ceil(DELAY_CAP_FACTOR * max(rule.threshold, 1.0) / info_min))
