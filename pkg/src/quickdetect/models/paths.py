import csv
import logging
from pathlib import Path

import numpy as np
from numpy.typing import ArrayLike, NDArray

from quickdetect.models.families import ChangeModel
from quickdetect.models.types import PathSpec, StateError

logger = logging.getLogger(__name__)


def simulate_path(model: ChangeModel, spec: PathSpec) -> NDArray[np.float64]:
    """Generate X_1, ..., X_{n_max} with the pre-change law up to the change point and θ-dynamics after.

    The path owns a PCG64 generator seeded from `spec.seed`, so identical (model, spec) pairs produce
    bitwise identical paths.

    Returns:
        Array of shape (n_max,) for scalar observations, (n_max, d) otherwise.
    """
    rng = np.random.Generator(np.random.PCG64(np.random.SeedSequence(spec.seed)))
    post = None
    if spec.change_point is not None:
        theta = model.validate_theta(spec.true_theta)
        post = model.post_coefficients(theta, spec.change_point)

    state = model.initial_state(rng.standard_normal((1, model.initial_draws)))
    noise = rng.standard_normal((spec.horizon, model.noise_dim))
    path = np.empty((spec.horizon, model.obs_dim))
    for i in range(spec.horizon):
        n = i + 1
        coefficients = model.pre_params if post is None or n <= spec.change_point else post
        x, state = model.advance(state, noise[i : i + 1], coefficients)
        path[i] = x[0]
    return path[:, 0] if model.obs_dim == 1 else path


def llr_increment(model: ChangeModel, theta: ArrayLike, x_new: ArrayLike, history: ArrayLike) -> float:
    """log f_θ(x_new | history) - log ψ(x_new | history) for a single observation.

    Args:
        model: Model defining the pre-change density ψ and the family of post-change densities.
        theta: Post-change parameter.
        x_new: The new observation (scalar or vector).
        history: Most recent observations, newest first; must hold at least `model.state_dim` values
            for AR models and one full observation for the multivariate model.

    Raises:
        StateError: If the history is shorter than the model's memory.
    """
    theta = np.asarray(theta, dtype=float)
    x = np.atleast_1d(np.asarray(x_new, dtype=float)).reshape(1, model.obs_dim)
    history = np.atleast_1d(np.asarray(history, dtype=float)).ravel()
    if history.shape[0] < model.state_dim:
        raise StateError(f"History holds {history.shape[0]} values, model needs {model.state_dim}")
    state = history[: model.state_dim].reshape(1, model.state_dim)
    points = theta.reshape((1, *model.param_shape))
    return float(model.llr(points, x, state)[0, 0])


def export_path_csv(path: Path, observations: NDArray[np.float64]) -> None:
    """Write a path with columns `index, x` (scalar observations) or `index, x1, ..., xd`."""
    observations = np.asarray(observations, dtype=float)
    matrix = observations[:, None] if observations.ndim == 1 else observations
    columns = ["x"] if observations.ndim == 1 else [f"x{j + 1}" for j in range(matrix.shape[1])]
    with path.open("w", newline="") as f:
        writer = csv.writer(f)
        writer.writerow(["index", *columns])
        for index, row in enumerate(matrix, start=1):
            writer.writerow([index, *(repr(float(value)) for value in row)])
    logger.debug("Wrote %d observations to %s", matrix.shape[0], path)
