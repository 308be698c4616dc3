"""
Batched replication engine.

Replications are split into fixed chunks of `batch_size` consecutive indices. Each chunk is
simulated as one vectorized batch, chunks run on a process pool, and results are concatenated in
ascending replication index. Chunk boundaries never depend on the worker count, so identical
settings give bitwise identical results for any number of workers.
"""

import logging
import os
import time
from collections.abc import Callable, Sequence
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field
from itertools import repeat
from typing import Any

import numpy as np
from numpy.typing import ArrayLike, NDArray

from quickdetect.detection import StoppingRule, sr_update
from quickdetect.models import ChangeModel
from quickdetect.simulation.noise import NoiseSource
from quickdetect.simulation.settings import SimulationSettings

logger = logging.getLogger(__name__)

THREADS_ENV_VAR = "QUICKDETECT_THREADS"


@dataclass(frozen=True, eq=False)
class Scenario:
    """Where the change happens and what it changes to.

    Observations X_1..X_ν follow the pre-change dynamics and X_{ν+1}, ... follow θ. A change point of
    None means the change never happens (the P_∞ regime).
    """

    model: ChangeModel
    change_point: int | None = None
    theta: NDArray[np.float64] | None = None
    _post: NDArray[np.float64] | None = field(init=False, default=None, repr=False)

    def __post_init__(self) -> None:
        if self.change_point is None:
            return
        if self.change_point < 0:
            raise ValueError(f"Change point must be nonnegative, got {self.change_point}")
        if self.theta is None:
            raise ValueError("A finite change point requires a post-change parameter")
        theta = self.model.validate_theta(self.theta)
        object.__setattr__(self, "theta", theta)
        object.__setattr__(self, "_post", self.model.post_coefficients(theta, self.change_point))

    @classmethod
    def pre_change(cls, model: ChangeModel) -> "Scenario":
        return cls(model=model)

    @classmethod
    def post_change(cls, model: ChangeModel, change_point: int, theta: ArrayLike) -> "Scenario":
        return cls(model=model, change_point=change_point, theta=np.asarray(theta, dtype=float))

    def coefficients(self, n: int) -> NDArray[np.float64]:
        """Parameter governing X_n."""
        if self._post is None or self.change_point is None or n <= self.change_point:
            return self.model.pre_params
        return self._post


@dataclass(frozen=True, eq=False)
class StoppingTimesTask:
    rule: StoppingRule
    scenario: Scenario
    thresholds: NDArray[np.float64]
    horizon: int


@dataclass(frozen=True, eq=False)
class StatisticPathsTask:
    rule: StoppingRule
    scenario: Scenario
    horizon: int


@dataclass(frozen=True, eq=False)
class LlrSumsTask:
    scenario: Scenario
    theta: NDArray[np.float64]
    start: int
    length: int


def _start_batch(scenario: Scenario, master_seed: int, indices: range) -> tuple[NoiseSource, NDArray[np.float64]]:
    model = scenario.model
    noise = NoiseSource(master_seed, indices, model.noise_dim, model.initial_draws)
    return noise, model.initial_state(noise.initial())


def stopping_times_batch(task: StoppingTimesTask, master_seed: int, indices: range) -> NDArray[np.int64]:
    """First-passage times of the statistic over every (ascending) threshold; 0 marks no crossing."""
    rule, scenario = task.rule, task.scenario
    model = scenario.model
    noise, state = _start_batch(scenario, master_seed, indices)
    levels = np.arange(task.thresholds.shape[0])
    times = np.zeros((len(indices), levels.shape[0]), dtype=np.int64)
    crossed = np.zeros(len(indices), dtype=np.intp)
    rows = np.arange(len(indices))
    log_r = np.full((len(indices), rule.grid.size), -np.inf)
    for n in range(1, task.horizon + 1):
        x, new_state = model.advance(state, noise.draw(rows), scenario.coefficients(n))
        log_r = sr_update(log_r, model.llr(rule.grid.points, x, state))
        state = new_state
        reached = np.searchsorted(task.thresholds, rule.statistic(log_r), side="right")
        fresh = (levels >= crossed[rows][:, None]) & (levels < reached[:, None])
        if fresh.any():
            block = times[rows]
            block[fresh] = n
            times[rows] = block
            crossed[rows] = np.maximum(crossed[rows], reached)
        keep = crossed[rows] < levels.shape[0]
        if not keep.all():
            rows, state, log_r = rows[keep], state[keep], log_r[keep]
            if rows.shape[0] == 0:
                break
    return times


def statistic_paths_batch(task: StatisticPathsTask, master_seed: int, indices: range) -> NDArray[np.float64]:
    """log statistic after each of `horizon` observations, shape (batch, horizon)."""
    rule, scenario = task.rule, task.scenario
    model = scenario.model
    noise, state = _start_batch(scenario, master_seed, indices)
    rows = np.arange(len(indices))
    log_r = np.full((len(indices), rule.grid.size), -np.inf)
    paths = np.empty((len(indices), task.horizon))
    for n in range(1, task.horizon + 1):
        x, new_state = model.advance(state, noise.draw(rows), scenario.coefficients(n))
        log_r = sr_update(log_r, model.llr(rule.grid.points, x, state))
        state = new_state
        paths[:, n - 1] = rule.statistic(log_r)
    return paths


def llr_sums_batch(task: LlrSumsTask, master_seed: int, indices: range) -> NDArray[np.float64]:
    """Cumulative LLR sums Z_{start+n}^{start}(θ) for n = 1..length, shape (batch, length)."""
    scenario = task.scenario
    model = scenario.model
    noise, state = _start_batch(scenario, master_seed, indices)
    rows = np.arange(len(indices))
    point = task.theta.reshape((1, *model.param_shape))
    sums = np.empty((len(indices), task.length))
    running = np.zeros(len(indices))
    for n in range(1, task.start + task.length + 1):
        x, new_state = model.advance(state, noise.draw(rows), scenario.coefficients(n))
        if n > task.start:
            running = running + model.llr(point, x, state)[:, 0]
            sums[:, n - task.start - 1] = running
        state = new_state
    return sums


def resolve_workers(requested: int | None, chunks: int) -> int:
    """Worker count: the request (or every CPU), capped by QUICKDETECT_THREADS and the chunk count."""
    workers = requested or os.cpu_count() or 1
    cap = os.environ.get(THREADS_ENV_VAR)
    if cap:
        try:
            workers = min(workers, max(1, int(cap)))
        except ValueError:
            logger.warning("Ignoring %s=%r: not an integer", THREADS_ENV_VAR, cap)
    return max(1, min(workers, chunks))


def replicate(batch_fn: Callable[[Any, int, range], NDArray], task: Any, settings: SimulationSettings) -> NDArray:
    """Run `batch_fn` over every chunk of replications and concatenate in replication order."""
    chunks = [
        range(start, min(start + settings.batch_size, settings.replications))
        for start in range(0, settings.replications, settings.batch_size)
    ]
    workers = resolve_workers(settings.workers, len(chunks))
    started = time.perf_counter()
    if workers == 1:
        results = [batch_fn(task, settings.seed, chunk) for chunk in chunks]
    else:
        with ProcessPoolExecutor(max_workers=workers) as pool:
            results = list(pool.map(batch_fn, repeat(task), repeat(settings.seed), chunks))
    logger.info(
        "%s: %d replications in %d chunks on %d workers (%.2fs)",
        batch_fn.__name__,
        settings.replications,
        len(chunks),
        workers,
        time.perf_counter() - started,
    )
    return np.concatenate(results, axis=0)


def simulate_stopping_times(
    rule: StoppingRule,
    scenario: Scenario,
    horizon: int,
    settings: SimulationSettings,
    thresholds: Sequence[float] | None = None,
) -> NDArray[np.int64]:
    """Stopping times of `rule` at several thresholds on common random numbers.

    Returns:
        (replications, len(thresholds)) integer array in the caller's threshold order; 0 marks a
        replication that did not stop within `horizon` observations. With `thresholds=None` the
        rule's own threshold is used and the result has one column.
    """
    if horizon < 1:
        raise ValueError(f"Horizon must be >= 1, got {horizon}")
    levels = np.asarray([rule.threshold] if thresholds is None else thresholds, dtype=float)
    order = np.argsort(levels, kind="stable")
    task = StoppingTimesTask(rule=rule, scenario=scenario, thresholds=levels[order], horizon=horizon)
    sorted_times = replicate(stopping_times_batch, task, settings)
    times = np.empty_like(sorted_times)
    times[:, order] = sorted_times
    return times


def simulate_statistic_paths(
    rule: StoppingRule, scenario: Scenario, horizon: int, settings: SimulationSettings
) -> NDArray[np.float64]:
    """log R_n (or log R_n^W) for n = 1..horizon on every replication."""
    if horizon < 1:
        raise ValueError(f"Horizon must be >= 1, got {horizon}")
    return replicate(statistic_paths_batch, StatisticPathsTask(rule=rule, scenario=scenario, horizon=horizon), settings)


def simulate_llr_sums(
    scenario: Scenario, theta: ArrayLike, start: int, length: int, settings: SimulationSettings
) -> NDArray[np.float64]:
    """Z_{start+n}^{start}(θ) = Σ_{i=start+1}^{start+n} log L_i(θ) for n = 1..length."""
    if start < 0 or length < 1:
        raise ValueError(f"Need start >= 0 and length >= 1, got start={start}, length={length}")
    theta = scenario.model.validate_theta(theta)
    return replicate(llr_sums_batch, LlrSumsTask(scenario=scenario, theta=theta, start=start, length=length), settings)
