import math

import numpy as np
from numpy.typing import ArrayLike
from pydantic import BaseModel, ConfigDict, Field, model_validator

Z_95 = 1.959963984540054


class Estimate(BaseModel):
    """Monte Carlo estimate with a normal-approximation 95% confidence interval.

    Attributes:
        mean: Point estimate.
        std_error: Standard error of the mean.
        ci95: (low, high) interval, always containing `mean`.
        n_used: Replications that entered the mean.
        censor_rate: Fraction of replications that reached the horizon without stopping.
        discard_rate: Fraction discarded by conditioning (stops at or before the change point).
    """

    model_config = ConfigDict(frozen=True)

    mean: float
    std_error: float = Field(ge=0.0)
    ci95: tuple[float, float]
    n_used: int = Field(ge=0)
    censor_rate: float = Field(default=0.0, ge=0.0, le=1.0)
    discard_rate: float = Field(default=0.0, ge=0.0, le=1.0)

    @model_validator(mode="after")
    def _check_interval(self) -> "Estimate":
        low, high = self.ci95
        if not low <= self.mean <= high:
            raise ValueError(f"Confidence interval {self.ci95} does not contain the mean {self.mean}")
        return self

    @classmethod
    def from_sample(cls, values: ArrayLike, *, censor_rate: float = 0.0, discard_rate: float = 0.0) -> "Estimate":
        values = np.asarray(values, dtype=float)
        mean = float(values.mean())
        std_error = float(values.std(ddof=1) / math.sqrt(values.shape[0])) if values.shape[0] > 1 else 0.0
        return cls(
            mean=mean,
            std_error=std_error,
            ci95=(mean - Z_95 * std_error, mean + Z_95 * std_error),
            n_used=int(values.shape[0]),
            censor_rate=censor_rate,
            discard_rate=discard_rate,
        )


class LcpfaEstimate(Estimate):
    """LCPFA estimate; `worst_k` is the k ≤ ℓ attaining the maximum."""

    worst_k: int = Field(ge=1)


class MaxRiskEstimate(BaseModel):
    """Worst conditional delay moment over a set of change points."""

    model_config = ConfigDict(frozen=True)

    change_point: int
    estimate: Estimate
    by_change_point: dict[int, Estimate]


class LcpfaTarget(BaseModel):
    """Constraint sup_{1≤k≤ℓ} P_∞(τ < k + m | τ ≥ k) <= beta."""

    model_config = ConfigDict(frozen=True)

    beta: float = Field(gt=0.0, lt=1.0)
    ell: int = Field(ge=1)
    m: int = Field(ge=1)


class CalibrationResult(BaseModel):
    model_config = ConfigDict(frozen=True)

    threshold: float
    achieved: LcpfaEstimate
    target: LcpfaTarget
    iterations: int
    converged: bool
