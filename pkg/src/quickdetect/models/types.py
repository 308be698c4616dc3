from dataclasses import dataclass
from enum import Enum

import numpy as np
from numpy.typing import ArrayLike, NDArray

WEIGHT_SUM_TOLERANCE = 1e-12


class ModelError(ValueError):
    """Raised when a change model is constructed with inadmissible parameters."""
    pass


class UnstableModelError(ModelError):
    """Raised when dynamics are not stable (spectral radius at or above one)."""
    pass


class GridError(ModelError):
    """Raised when a parameter grid violates its support or weighting invariants."""
    pass


class StateError(ValueError):
    """Raised when a history/state vector is too short for the model's memory."""
    pass


class ModelFamily(str, Enum):
    IID_GAUSSIAN_SHIFT = "iid-gaussian-shift"
    AR_P_GAUSSIAN = "ar-p-gaussian"
    MV_LINEAR_RANDOM_COEFF = "mv-linear-random-coeff"


@dataclass(frozen=True, eq=False)
class ParameterGrid:
    """Finite post-change parameter set with strictly positive mixing weights.

    `points` is stacked along the first axis, so an AR(p) grid has shape (N, p) and a
    multivariate linear grid has shape (N, p, p).
    """

    points: NDArray[np.float64]
    weights: NDArray[np.float64]

    def __post_init__(self) -> None:
        points = np.asarray(self.points, dtype=float)
        weights = np.asarray(self.weights, dtype=float)
        if points.ndim < 2 or points.shape[0] == 0:
            raise GridError("Parameter grid must contain at least one point")
        if weights.shape != (points.shape[0],):
            raise GridError(f"Expected {points.shape[0]} weights, got shape {weights.shape}")
        if not np.all(np.isfinite(points)):
            raise GridError("Parameter grid points must be finite")
        if np.any(weights <= 0.0):
            raise GridError("Grid weights must be strictly positive")
        if abs(weights.sum() - 1.0) > WEIGHT_SUM_TOLERANCE:
            raise GridError(f"Grid weights must sum to 1, got {weights.sum():.15g}")
        object.__setattr__(self, "points", points)
        object.__setattr__(self, "weights", weights)

    @classmethod
    def uniform(cls, points: ArrayLike) -> "ParameterGrid":
        points = _stack_points(points)
        size = points.shape[0]
        if size == 0:
            raise GridError("Parameter grid must contain at least one point")
        return cls(points=points, weights=np.full(size, 1.0 / size))

    @classmethod
    def weighted(cls, points: ArrayLike, weights: ArrayLike) -> "ParameterGrid":
        return cls(points=_stack_points(points), weights=np.asarray(weights, dtype=float))

    @classmethod
    def singleton(cls, theta: ArrayLike) -> "ParameterGrid":
        return cls(points=_stack_points([theta]), weights=np.ones(1))

    @property
    def size(self) -> int:
        return int(self.points.shape[0])

    @property
    def log_weights(self) -> NDArray[np.float64]:
        return np.log(self.weights)

    def __len__(self) -> int:
        return self.size


@dataclass(frozen=True, eq=False)
class PathSpec:
    """What a single simulated path looks like.

    Attributes:
        change_point: ν, the index of the last pre-change observation; None encodes ν = ∞.
        true_theta: Post-change parameter (ignored when change_point is None).
        horizon: Number of observations to generate.
        seed: Seed of the path's own random generator.
    """

    change_point: int | None
    true_theta: NDArray[np.float64] | None
    horizon: int
    seed: int

    def __post_init__(self) -> None:
        if self.horizon < 1:
            raise ValueError(f"Path horizon must be >= 1, got {self.horizon}")
        if self.change_point is not None:
            if self.change_point < 0:
                raise ValueError(f"Change point must be nonnegative, got {self.change_point}")
            if self.true_theta is None:
                raise ValueError("A finite change point requires a post-change parameter")


def _stack_points(points: ArrayLike) -> NDArray[np.float64]:
    """Stack grid points so that scalar parameters become length-1 vectors."""
    stacked = np.asarray(points, dtype=float)
    if stacked.ndim == 1:
        stacked = stacked[:, None]
    return stacked
