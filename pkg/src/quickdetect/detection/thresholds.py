"""
Threshold and schedule formulas.

All logarithms are natural, so every threshold is in nats and comparable with log R_n^W.
"""

import logging
import math
from typing import NamedTuple

from pydantic import BaseModel, ConfigDict

logger = logging.getLogger(__name__)


class ParameterError(ValueError):
    """Raised when a threshold or schedule formula is evaluated outside its domain."""
    pass


class ScheduleParams(BaseModel):
    """Window, span, and threshold that place the WSR rule in the LCPFA class of level β.

    Attributes:
        beta: LCPFA bound.
        kappa_check: Ratio ℓ/m used to derive the span from the window.
        delta_star: Numerator of δ̌.
        rho1: 1 / (1 + |log β|).
        delta_check: delta_star / (1 + |log β|).
        rho2: delta_check · rho1.
        m: Window length, ⌊|log β| / rho1⌋ (at least 1).
        ell: Span ℓ, ⌊kappa_check · m⌋ (at least 1).
        k_star: ell + m.
        alpha2: β (1 - rho2)^{ell + m} / (1 + β).
        a_beta: log((1 - alpha2) / (rho2 · alpha2)), in nats.
    """

    model_config = ConfigDict(frozen=True)

    beta: float
    kappa_check: float
    delta_star: float
    rho1: float
    delta_check: float
    rho2: float
    m: int
    ell: int
    k_star: int
    alpha2: float
    a_beta: float


class Alpha1Result(NamedTuple):
    value: float
    m0: float
    exceeds_m0: bool


def schedule_from_beta(beta: float, kappa_check: float = 1.0, delta_star: float = 0.5) -> ScheduleParams:
    """Compute the LCPFA schedule (ϱ₁, δ̌, ϱ₂, m, ℓ, α₂, a) for a bound β.

    Raises:
        ParameterError: If beta or delta_star is outside (0, 1) or kappa_check is not positive.
    """
    if not 0.0 < beta < 1.0:
        raise ParameterError(f"beta must be in (0, 1), got {beta}")
    if not kappa_check > 0.0:
        raise ParameterError(f"kappa_check must be positive, got {kappa_check}")
    if not 0.0 < delta_star < 1.0:
        raise ParameterError(f"delta_star must be in (0, 1), got {delta_star}")

    log_beta = abs(math.log(beta))
    rho1 = 1.0 / (1.0 + log_beta)
    delta_check = delta_star / (1.0 + log_beta)
    rho2 = delta_check * rho1
    m = max(1, math.floor(log_beta / rho1))
    ell = max(1, math.floor(kappa_check * m))
    # (1 - rho2)^(ell + m) through log1p keeps precision when rho2 is tiny.
    alpha2 = beta * math.exp((ell + m) * math.log1p(-rho2)) / (1.0 + beta)
    a_beta = math.log((1.0 - alpha2) / (rho2 * alpha2))
    return ScheduleParams(
        beta=beta,
        kappa_check=kappa_check,
        delta_star=delta_star,
        rho1=rho1,
        delta_check=delta_check,
        rho2=rho2,
        m=m,
        ell=ell,
        k_star=ell + m,
        alpha2=alpha2,
        a_beta=a_beta,
    )


def class_alpha1(beta: float, m: int, rho1: float) -> Alpha1Result:
    """α₁ = β + (1 - ϱ₁)^{m+1}, flagged against m₀ = |log(1 - β)| / |log(1 - ϱ₁)| - 1.

    α₁ < 1 requires m > m₀. A window at or below m₀ is reported through `exceeds_m0=False`
    and a warning, not an error.
    """
    if not 0.0 < beta < 1.0:
        raise ParameterError(f"beta must be in (0, 1), got {beta}")
    if not 0.0 < rho1 < 1.0:
        raise ParameterError(f"rho1 must be in (0, 1), got {rho1}")
    if m < 0:
        raise ParameterError(f"m must be nonnegative, got {m}")
    value = beta + math.exp((m + 1) * math.log1p(-rho1))
    m0 = abs(math.log1p(-beta)) / abs(math.log1p(-rho1)) - 1.0
    exceeds_m0 = m > m0
    if not exceeds_m0:
        logger.warning("Window m=%d does not exceed m0=%.4g; alpha1=%.4g is not below 1", m, m0, value)
    return Alpha1Result(value=value, m0=m0, exceeds_m0=exceeds_m0)


def bayes_threshold(alpha: float, *, rho: float | None = None, mean: float | None = None) -> float:
    """Threshold a = log(ν̄ / α) that keeps the weighted PFA of the WSR rule below α.

    Pass either the parameter `rho` of a geometric prior (whose mean is (1 - ρ)/ρ) or the prior
    mean `mean` of any change-point prior with a finite mean.

    Raises:
        ParameterError: If alpha is outside (0, 1), if neither or both prior descriptions are given,
            or if the prior description is out of range.
    """
    if not 0.0 < alpha < 1.0:
        raise ParameterError(f"alpha must be in (0, 1), got {alpha}")
    if (rho is None) == (mean is None):
        raise ParameterError("Pass exactly one of rho (geometric prior) or mean (prior mean)")
    if rho is not None:
        if not 0.0 < rho < 1.0:
            raise ParameterError(f"Geometric prior parameter must be in (0, 1), got {rho}")
        mean = (1.0 - rho) / rho
    assert mean is not None
    if not mean > 0.0:
        raise ParameterError(f"Prior mean must be positive, got {mean}")
    return math.log(mean / alpha)
