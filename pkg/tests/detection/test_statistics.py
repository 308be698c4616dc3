import csv
import math

import numpy as np
import pytest

from quickdetect.detection import DetectorState, StoppingRule, sr_update, step, write_trace_csv, wsr_mix
from quickdetect.models import ArGaussianModel, ParameterGrid, StateError
from quickdetect.simulation import Scenario, SimulationSettings, simulate_statistic_paths


def brute_force_wsr(path: np.ndarray, grid: ParameterGrid, n: int) -> float:
    """Σ_j w_j Σ_{k<n} Π_{i=k+1..n} L_i(θ_j) for AR(1) with a = 0 and X_0 = 0."""
    previous = np.concatenate([[0.0], path[:-1]])
    total = 0.0
    for theta, weight in zip(grid.points[:, 0], grid.weights, strict=True):
        lr = np.exp(theta * path[:n] * previous[:n] - 0.5 * theta**2 * previous[:n] ** 2)
        total += weight * sum(np.prod(lr[k:n]) for k in range(n))
    return total


def test_sr_update_from_empty_sum():
    assert sr_update(-math.inf, 0.0) == 0.0


def test_sr_update_hand_value():
    assert sr_update(math.log(3.0), math.log(2.0)) == pytest.approx(math.log(8.0), abs=1e-15)


def test_sr_statistic_counts_steps_under_zero_increments():
    log_r = -math.inf
    for n in range(1, 101):
        log_r = sr_update(log_r, 0.0)
        assert math.exp(log_r) == pytest.approx(n, rel=1e-13)


def test_sr_update_stays_finite_for_huge_statistics():
    assert sr_update(5000.0, 1.0) == pytest.approx(5001.0)
    assert wsr_mix(np.array([5000.0, 5000.0]), np.array([0.5, 0.5])) == pytest.approx(5000.0)


@pytest.mark.parametrize("n, rel", [(20_000, 0.15), pytest.param(1_000_000, 0.02, marks=pytest.mark.slow)])
def test_log_wsr_grows_linearly_along_a_long_post_change_path(ar1_model, table1_grid, n, rel):
    settings = SimulationSettings(replications=1, seed=17, workers=1, batch_size=1)
    scenario = Scenario.post_change(ar1_model, 0, [0.9])
    paths = simulate_statistic_paths(StoppingRule.wsr(table1_grid, 5.0), scenario, n, settings)
    assert np.all(np.isfinite(paths))
    assert paths[0, -1] == pytest.approx(n * 0.81 / (2 * 0.19), rel=rel)


def test_wsr_mix_singleton_is_identity():
    assert wsr_mix(np.array([3.25]), np.array([1.0])) == 3.25


def test_wsr_mix_symmetric_points():
    assert wsr_mix(np.log([4.0, 4.0]), np.array([0.5, 0.5])) == pytest.approx(math.log(4.0), abs=1e-15)


def test_wsr_mix_arithmetic_series():
    weights = np.full(18, 1 / 18)
    assert wsr_mix(np.log(np.arange(1, 19)), weights) == pytest.approx(math.log(9.5), abs=1e-14)


def test_wsr_mix_bounded_by_extremes():
    rng = np.random.default_rng(0)
    for _ in range(50):
        log_r = rng.normal(scale=50.0, size=7)
        weights = rng.dirichlet(np.ones(7))
        mixed = wsr_mix(log_r, weights)
        assert log_r.min() - 1e-12 <= mixed <= log_r.max() + 1e-12


def test_wsr_mix_all_empty_is_minus_infinity():
    assert wsr_mix(np.full(3, -np.inf), np.full(3, 1 / 3)) == -math.inf


def test_wsr_mix_rejects_length_mismatch():
    with pytest.raises(ValueError):
        wsr_mix(np.zeros(3), np.array([0.5, 0.5]))


def test_step_from_start_with_zero_increments():
    model = ArGaussianModel(np.array([0.0]))
    grid = ParameterGrid.uniform([0.2, 0.5])
    state = step(DetectorState.initial(grid), model, grid, 1.0, [0.0])
    assert state.n == 1
    np.testing.assert_array_equal(state.log_r, [0.0, 0.0])
    assert state.log_wsr == pytest.approx(0.0, abs=1e-15)


def test_step_requires_history():
    model = ArGaussianModel(np.array([0.0, 0.0]))
    grid = ParameterGrid.uniform([[0.2, 0.1]])
    with pytest.raises(StateError):
        step(DetectorState.initial(grid), model, grid, 1.0, [0.5])


def test_recursion_matches_double_sum(ar1_model, table1_grid):
    rng = np.random.default_rng(2024)
    for _ in range(100):
        path = rng.standard_normal(20)
        state = DetectorState.initial(table1_grid)
        history = ar1_model.initial_history()
        for n, x in enumerate(path, start=1):
            state = step(state, ar1_model, table1_grid, x, history)
            history = ar1_model.push_history(history, x)
            assert math.exp(state.log_wsr) == pytest.approx(brute_force_wsr(path, table1_grid, n), rel=1e-10)


def test_write_trace_csv(tmp_path, ar1_model):
    grid = ParameterGrid.uniform([0.3, 0.6])
    states = [DetectorState.initial(grid)]
    states.append(step(states[0], ar1_model, grid, 0.5, [0.0]))
    target = tmp_path / "trace.csv"
    write_trace_csv(target, states, grid)
    with target.open() as f:
        rows = list(csv.reader(f))
    assert rows[0] == ["n", "log_wsr", "log_r_1", "log_r_2"]
    assert rows[1] == ["0", "-inf", "-inf", "-inf"]
    assert rows[2][0] == "1"
    assert rows[2][2:] == ["0.0", "0.0"]
    assert float(rows[2][1]) == pytest.approx(0.0, abs=1e-15)
