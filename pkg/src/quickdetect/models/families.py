"""
Gaussian observation models with a change in their dynamics.

Every model here is finite-memory Markov: the conditional law of X_n given the past depends only on
a fixed-length state vector (the last p observations for AR(p), the previous observation for the
multivariate linear model, nothing for i.i.d. data). Batched methods operate on arrays whose first
axis indexes independent replications.
"""

from abc import ABC, abstractmethod
from dataclasses import dataclass
from functools import cached_property
from typing import ClassVar

import numpy as np
import scipy.linalg
from numpy.typing import ArrayLike, NDArray

from quickdetect.models.types import GridError, ModelError, ModelFamily, ParameterGrid, UnstableModelError

SYMMETRY_TOLERANCE = 1e-10


def spectral_radius(matrix: NDArray[np.float64]) -> float:
    return float(np.max(np.abs(np.linalg.eigvals(matrix))))


def companion_matrix(coefficients: ArrayLike) -> NDArray[np.float64]:
    """Companion matrix of the AR(p) recursion X_n = c_1 X_{n-1} + ... + c_p X_{n-p} + w_n."""
    coefficients = np.atleast_1d(np.asarray(coefficients, dtype=float))
    order = coefficients.shape[0]
    matrix = np.zeros((order, order))
    matrix[0, :] = coefficients
    matrix[1:, :-1] = np.eye(order - 1)
    return matrix


class ChangeModel(ABC):
    """Pre-/post-change pair of conditional Gaussian densities with a sampler.

    Subclasses are immutable and safe to share between threads and processes. The batched
    interface is what the simulation engine drives:

        x, state = model.advance(state, noise, coefficients)
        increments = model.llr(grid.points, x, previous_state)
    """

    family: ClassVar[ModelFamily]

    @property
    @abstractmethod
    def pre_params(self) -> NDArray[np.float64]: ...

    @property
    @abstractmethod
    def obs_dim(self) -> int: ...

    @property
    @abstractmethod
    def state_dim(self) -> int: ...

    @property
    @abstractmethod
    def noise_dim(self) -> int:
        """Number of standard normal draws consumed per observation."""

    @property
    def initial_draws(self) -> int:
        """Number of standard normal draws consumed to set the initial state."""
        return 0

    @property
    def param_shape(self) -> tuple[int, ...]:
        return self.pre_params.shape

    def initial_state(self, draws: NDArray[np.float64]) -> NDArray[np.float64]:
        """Initial states for a batch; `draws` has shape (batch, initial_draws)."""
        return np.zeros((draws.shape[0], self.state_dim))

    def initial_history(self) -> NDArray[np.float64]:
        return np.zeros(self.state_dim)

    def post_coefficients(self, theta: NDArray[np.float64], change_point: int) -> NDArray[np.float64]:
        """Coefficients in force after the change. Built-in families ignore the change point."""
        return theta

    @abstractmethod
    def validate_theta(self, theta: ArrayLike) -> NDArray[np.float64]:
        """Return `theta` as an array if it is admissible, raising ModelError otherwise."""

    @abstractmethod
    def push_history(self, history: NDArray[np.float64], x: NDArray[np.float64]) -> NDArray[np.float64]:
        """State vector after observing `x` (single stream)."""

    @abstractmethod
    def advance(
        self, state: NDArray[np.float64], noise: NDArray[np.float64], coefficients: NDArray[np.float64]
    ) -> tuple[NDArray[np.float64], NDArray[np.float64]]:
        """Draw the next observation for every replication in the batch.

        Args:
            state: (batch, state_dim) states before the observation
            noise: (batch, noise_dim) standard normal draws
            coefficients: parameter in force at this step (pre-change or post-change)

        Returns:
            Tuple of the observations, shape (batch, obs_dim), and the updated states.
        """

    @abstractmethod
    def llr(
        self, points: NDArray[np.float64], x: NDArray[np.float64], state: NDArray[np.float64]
    ) -> NDArray[np.float64]:
        """Log-likelihood-ratio increments log f_θ(x | state) - log ψ(x | state).

        Args:
            points: (N, *param_shape) post-change parameters
            x: (batch, obs_dim) new observations
            state: (batch, state_dim) states before the observations

        Returns:
            (batch, N) increments in nats. Exactly zero wherever a point equals the pre-change parameter.
        """

    def check_grid(self, grid: ParameterGrid) -> None:
        """Validate every grid point and reject any point equal to the pre-change parameter."""
        if grid.points.shape[1:] != self.param_shape:
            raise GridError(
                f"Grid points have shape {grid.points.shape[1:]}, expected {self.param_shape} for {self.family.value}"
            )
        for index, point in enumerate(grid.points):
            try:
                self.validate_theta(point)
            except ModelError as e:
                raise GridError(f"Grid point {index} is not admissible: {e}") from e
            if np.array_equal(point, self.pre_params):
                raise GridError(f"Grid point {index} equals the pre-change parameter {self.pre_params.tolist()}")


@dataclass(frozen=True, eq=False)
class IidGaussianShiftModel(ChangeModel):
    """X_n = μ + w_n with w_n ~ N(0, I); the mean shifts from `mu` to θ."""

    mu: NDArray[np.float64]

    family: ClassVar[ModelFamily] = ModelFamily.IID_GAUSSIAN_SHIFT

    def __post_init__(self) -> None:
        mu = np.atleast_1d(np.asarray(self.mu, dtype=float))
        if mu.ndim != 1 or not np.all(np.isfinite(mu)):
            raise ModelError(f"Pre-change mean must be a finite vector, got {self.mu!r}")
        object.__setattr__(self, "mu", mu)

    @property
    def pre_params(self) -> NDArray[np.float64]:
        return self.mu

    @property
    def obs_dim(self) -> int:
        return int(self.mu.shape[0])

    @property
    def state_dim(self) -> int:
        return 0

    @property
    def noise_dim(self) -> int:
        return self.obs_dim

    def validate_theta(self, theta: ArrayLike) -> NDArray[np.float64]:
        theta = np.atleast_1d(np.asarray(theta, dtype=float))
        if theta.shape != self.mu.shape or not np.all(np.isfinite(theta)):
            raise ModelError(f"Mean parameter must be a finite vector of shape {self.mu.shape}")
        return theta

    def push_history(self, history: NDArray[np.float64], x: NDArray[np.float64]) -> NDArray[np.float64]:
        return history

    def advance(self, state, noise, coefficients):
        return coefficients + noise, state

    def llr(self, points, x, state):
        shift = points - self.mu
        return (x - self.mu) @ shift.T - 0.5 * np.sum(shift**2, axis=1)


@dataclass(frozen=True, eq=False)
class ArGaussianModel(ChangeModel):
    """Scalar AR(p) with unit Gaussian noise; the coefficient vector changes from `a` to θ.

    The state is Φ_{n-1} = (X_{n-1}, ..., X_{n-p}). Paths start from Φ_0 = 0 unless
    `stationary_start` is set, in which case Φ_0 is drawn from the pre-change stationary law.
    """

    a: NDArray[np.float64]
    stationary_start: bool = False

    family: ClassVar[ModelFamily] = ModelFamily.AR_P_GAUSSIAN

    def __post_init__(self) -> None:
        a = np.atleast_1d(np.asarray(self.a, dtype=float))
        if a.ndim != 1 or a.shape[0] == 0:
            raise ModelError(f"AR coefficients must be a nonempty vector, got {self.a!r}")
        radius = spectral_radius(companion_matrix(a))
        if radius >= 1.0:
            raise UnstableModelError(f"AR spectral radius {radius:.4g} >= 1")
        object.__setattr__(self, "a", a)

    @property
    def order(self) -> int:
        return int(self.a.shape[0])

    @property
    def pre_params(self) -> NDArray[np.float64]:
        return self.a

    @property
    def obs_dim(self) -> int:
        return 1

    @property
    def state_dim(self) -> int:
        return self.order

    @property
    def noise_dim(self) -> int:
        return 1

    @property
    def initial_draws(self) -> int:
        return self.order if self.stationary_start else 0

    @cached_property
    def _stationary_factor(self) -> NDArray[np.float64]:
        from quickdetect.info.lyapunov import solve_stationary_covariance

        innovation = np.zeros((self.order, self.order))
        innovation[0, 0] = 1.0
        covariance = solve_stationary_covariance(companion_matrix(self.a), innovation)
        return scipy.linalg.cholesky(covariance, lower=True)

    def initial_state(self, draws: NDArray[np.float64]) -> NDArray[np.float64]:
        if not self.stationary_start:
            return np.zeros((draws.shape[0], self.order))
        return draws @ self._stationary_factor.T

    def validate_theta(self, theta: ArrayLike) -> NDArray[np.float64]:
        theta = np.atleast_1d(np.asarray(theta, dtype=float))
        if theta.shape != self.a.shape:
            raise ModelError(f"AR parameter must have shape {self.a.shape}, got {theta.shape}")
        radius = spectral_radius(companion_matrix(theta))
        if radius >= 1.0:
            raise UnstableModelError(f"AR spectral radius {radius:.4g} >= 1")
        return theta

    def push_history(self, history: NDArray[np.float64], x: NDArray[np.float64]) -> NDArray[np.float64]:
        return np.concatenate([np.atleast_1d(x), history[:-1]])

    def advance(self, state, noise, coefficients):
        x = state @ coefficients + noise[:, 0]
        return x[:, None], np.concatenate([x[:, None], state[:, :-1]], axis=1)

    def llr(self, points, x, state):
        # With δ = (θ - a)ᵀΦ and innovation y = x - aᵀΦ the increment is δ·(y - δ/2).
        shift = state @ (points - self.a).T
        innovation = x[:, 0] - state @ self.a
        return shift * (innovation[:, None] - 0.5 * shift)


@dataclass(frozen=True, eq=False)
class MvLinearRandomCoeffModel(ChangeModel):
    """X_n = (A + B_n) X_{n-1} + w_n in R^p with A changing from `a0` to θ.

    w_n ~ N(0, q0) and the random coefficients B_n are i.i.d. Gaussian with vec(B_n) ~ N(0, q1),
    where vec stacks B row by row: q1[i*p + k, j*p + l] = E[B_ik B_jl].
    """

    a0: NDArray[np.float64]
    q0: NDArray[np.float64]
    q1: NDArray[np.float64]

    family: ClassVar[ModelFamily] = ModelFamily.MV_LINEAR_RANDOM_COEFF

    def __post_init__(self) -> None:
        a0 = np.asarray(self.a0, dtype=float)
        q0 = np.asarray(self.q0, dtype=float)
        q1 = np.asarray(self.q1, dtype=float)
        if a0.ndim != 2 or a0.shape[0] != a0.shape[1]:
            raise ModelError(f"A0 must be a square matrix, got shape {a0.shape}")
        dim = a0.shape[0]
        if q0.shape != (dim, dim):
            raise ModelError(f"Q0 must have shape {(dim, dim)}, got {q0.shape}")
        if q1.shape != (dim * dim, dim * dim):
            raise ModelError(f"Q1 must have shape {(dim * dim, dim * dim)}, got {q1.shape}")
        for name, matrix in (("Q0", q0), ("Q1", q1)):
            if not np.allclose(matrix, matrix.T, atol=SYMMETRY_TOLERANCE):
                raise ModelError(f"{name} must be symmetric")
            try:
                np.linalg.cholesky(matrix)
            except np.linalg.LinAlgError as e:
                raise ModelError(f"{name} must be positive definite") from e
        object.__setattr__(self, "a0", a0)
        object.__setattr__(self, "q0", q0)
        object.__setattr__(self, "q1", q1)
        radius = spectral_radius(self.second_moment_matrix(a0))
        if radius >= 1.0:
            raise UnstableModelError(f"Spectral radius of A0 (x) A0 + Q1 is {radius:.4g} >= 1")

    @property
    def dim(self) -> int:
        return int(self.a0.shape[0])

    @property
    def pre_params(self) -> NDArray[np.float64]:
        return self.a0

    @property
    def obs_dim(self) -> int:
        return self.dim

    @property
    def state_dim(self) -> int:
        return self.dim

    @property
    def noise_dim(self) -> int:
        return self.dim + self.dim * self.dim

    @cached_property
    def _coefficient_covariance(self) -> NDArray[np.float64]:
        """E[B_ik B_jl] indexed as [i, k, j, l]."""
        dim = self.dim
        return self.q1.reshape(dim, dim, dim, dim)

    @cached_property
    def _noise_factor(self) -> NDArray[np.float64]:
        return scipy.linalg.cholesky(self.q0, lower=True)

    @cached_property
    def _coefficient_factor(self) -> NDArray[np.float64]:
        return scipy.linalg.cholesky(self.q1, lower=True)

    def second_moment_matrix(self, theta: NDArray[np.float64]) -> NDArray[np.float64]:
        """E[(θ + B) ⊗ (θ + B)], whose spectral radius governs mean-square stability."""
        dim = self.dim
        kron_moment = self._coefficient_covariance.transpose(0, 2, 1, 3).reshape(dim * dim, dim * dim)
        return np.kron(theta, theta) + kron_moment

    def conditional_covariance(self, state: NDArray[np.float64]) -> NDArray[np.float64]:
        """G(x) = E[B x xᵀ Bᵀ] + Q0 for a batch of states, shape (batch, p, p)."""
        return self.q0 + np.einsum("ikjl,bk,bl->bij", self._coefficient_covariance, state, state)

    def validate_theta(self, theta: ArrayLike) -> NDArray[np.float64]:
        theta = np.asarray(theta, dtype=float)
        if theta.shape != self.a0.shape:
            raise ModelError(f"Coefficient matrix must have shape {self.a0.shape}, got {theta.shape}")
        if not np.all(np.isfinite(theta)):
            raise ModelError("Coefficient matrix must be finite")
        radius = spectral_radius(self.second_moment_matrix(theta))
        if radius >= 1.0:
            raise UnstableModelError(f"Spectral radius of theta (x) theta + Q1 is {radius:.4g} >= 1")
        return theta

    def push_history(self, history: NDArray[np.float64], x: NDArray[np.float64]) -> NDArray[np.float64]:
        return np.array(x, dtype=float).reshape(self.dim)

    def advance(self, state, noise, coefficients):
        dim = self.dim
        w = noise[:, :dim] @ self._noise_factor.T
        b = (noise[:, dim:] @ self._coefficient_factor.T).reshape(-1, dim, dim)
        x = state @ coefficients.T + np.einsum("bij,bj->bi", b, state) + w
        return x, x

    def llr(self, points, x, state):
        covariance = self.conditional_covariance(state)
        residual = x - state @ self.a0.T
        shift = np.einsum("nij,bj->bni", points - self.a0, state)
        rhs = residual[:, None, :] - 0.5 * shift
        solved = np.linalg.solve(covariance[:, None], rhs[..., None])[..., 0]
        return np.einsum("bni,bni->bn", shift, solved)
