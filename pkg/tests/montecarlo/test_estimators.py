import logging
import math

import numpy as np
import pytest

from quickdetect.detection import ParameterError, StoppingRule, bayes_threshold
from quickdetect.montecarlo import (
    Estimate,
    EstimationError,
    estimate_add,
    estimate_lcpfa,
    estimate_max_risk,
    estimate_moment_risk,
    estimate_statistic_mean,
    estimate_weighted_pfa,
    lcpfa_from_times,
    moment_from_times,
    pfa_truncation,
)
from quickdetect.simulation import SimulationSettings


@pytest.fixture
def capped(settings) -> SimulationSettings:
    return settings.model_copy(update={"delay_cap": 500})


@pytest.fixture
def always_stop(table1_grid) -> StoppingRule:
    return StoppingRule.wsr(table1_grid, -1e6)


def test_estimate_interval_must_contain_mean():
    with pytest.raises(ValueError):
        Estimate(mean=1.0, std_error=0.1, ci95=(1.5, 2.0), n_used=10)
    estimate = Estimate.from_sample([1.0, 2.0, 3.0])
    assert estimate.mean == 2.0
    assert estimate.std_error == pytest.approx(1 / math.sqrt(3))
    assert estimate.ci95[0] < 2.0 < estimate.ci95[1]


def test_immediate_stop_has_unit_delay(ar1_model, always_stop, capped):
    add = estimate_add(always_stop, ar1_model, [0.9], 0, capped)
    assert add.mean == 1.0
    assert add.std_error == 0.0
    assert add.n_used == capped.replications
    assert estimate_moment_risk(always_stop, ar1_model, [0.9], 0, 2, capped).mean == 1.0


def test_first_moment_is_the_average_delay(ar1_model, table1_grid, capped):
    rule = StoppingRule.wsr(table1_grid, math.log(395.0))
    assert estimate_moment_risk(rule, ar1_model, [0.9], 0, 1, capped) == estimate_add(rule, ar1_model, [0.9], 0, capped)


def test_second_moment_dominates_squared_delay(ar1_model, table1_grid, capped):
    rule = StoppingRule.wsr(table1_grid, math.log(395.0))
    add = estimate_add(rule, ar1_model, [0.9], 0, capped)
    second = estimate_moment_risk(rule, ar1_model, [0.9], 0, 2, capped)
    assert 1.0 <= second.mean / add.mean**2 <= 3.0


def test_stops_before_the_change_are_discarded(ar1_model, always_stop, capped):
    with pytest.raises(EstimationError, match="change point 5"):
        estimate_add(always_stop, ar1_model, [0.9], 5, capped)


def test_discard_rate_counts_early_alarms():
    estimate = moment_from_times(np.array([2, 5, 7, 9]), change_point=4, r=1)
    assert estimate.discard_rate == 0.25
    assert estimate.n_used == 3
    assert estimate.mean == pytest.approx((1 + 3 + 5) / 3)


def test_censored_runs_are_reported(caplog):
    with caplog.at_level(logging.WARNING, logger="quickdetect.montecarlo.estimators"):
        estimate = moment_from_times(np.array([3, 0, 4, 0]), change_point=0, r=1)
    assert estimate.censor_rate == 0.5
    assert estimate.n_used == 2
    assert "delay cap" in caplog.text


def test_all_censored_is_an_error(ar1_model, table1_grid, settings):
    rule = StoppingRule.wsr(table1_grid, 1e6)
    with pytest.raises(EstimationError):
        estimate_add(rule, ar1_model, [0.9], 0, settings.model_copy(update={"delay_cap": 5}))


def test_moment_order_below_one_rejected(ar1_model, always_stop, capped):
    with pytest.raises(ParameterError):
        estimate_moment_risk(always_stop, ar1_model, [0.9], 0, 0.5, capped)


def test_delay_grows_with_threshold_on_common_random_numbers(ar1_model, table1_grid, capped):
    means = [
        estimate_add(StoppingRule.wsr(table1_grid, a), ar1_model, [0.7], 0, capped).mean for a in (3.0, 4.0, 5.0, 6.0)
    ]
    assert means == sorted(means)


def test_worst_change_point_is_zero(ar1_model, table1_grid, capped):
    rule = StoppingRule.wsr(table1_grid, math.log(395.0))
    result = estimate_max_risk(rule, ar1_model, [0.9], [0, 10], 1, capped)
    assert result.change_point == 0
    assert set(result.by_change_point) == {0, 10}
    assert result.estimate == result.by_change_point[0]
    with pytest.raises(ParameterError):
        estimate_max_risk(rule, ar1_model, [0.9], [], 1, capped)


def test_lcpfa_of_immediate_stop_is_one(ar1_model, always_stop, settings):
    estimate = estimate_lcpfa(always_stop, ar1_model, 5, 5, settings)
    assert estimate.mean == 1.0
    assert estimate.worst_k == 1


def test_lcpfa_of_unreachable_threshold_is_zero(ar1_model, table1_grid, settings):
    estimate = estimate_lcpfa(StoppingRule.wsr(table1_grid, 1e6), ar1_model, 5, 5, settings)
    assert estimate.mean == 0.0
    assert estimate.censor_rate == 1.0


def test_lcpfa_by_hand():
    times = np.array([1, 3, 0, 2])
    bound = lcpfa_from_times(times, ell=2, m=2, form="bound")
    assert bound.mean == 1.0
    assert bound.worst_k == 2
    assert bound.n_used == 3
    assert bound.censor_rate == 0.25
    exact = lcpfa_from_times(times, ell=2, m=2, form="exact")
    assert exact.mean == pytest.approx(2 / 3)
    assert exact.ci95[1] <= 1.0


def test_lcpfa_needs_someone_at_risk():
    with pytest.raises(EstimationError):
        lcpfa_from_times(np.array([], dtype=np.int64), ell=3, m=1)


def test_lcpfa_bound_is_clipped_when_early_stops_outnumber_those_at_risk():
    times = np.array([1] * 9 + [0])
    bound = lcpfa_from_times(times, ell=2, m=1)
    assert bound.mean == 1.0
    assert bound.worst_k == 2
    assert bound.n_used == 1
    assert bound.std_error == 0.0
    assert bound.ci95 == (1.0, 1.0)
    exact = lcpfa_from_times(times, ell=2, m=1, form="exact")
    assert exact.mean == pytest.approx(0.9)
    assert exact.worst_k == 1


def test_lcpfa_at_low_thresholds_is_a_probability(ar1_model, table1_grid, settings):
    many = settings.model_copy(update={"replications": 20_000})
    values = [
        estimate_lcpfa(StoppingRule.wsr(table1_grid, a), ar1_model, 25, 25, many).mean for a in (0.0, 0.5, 1.0)
    ]
    assert all(0.0 <= value <= 1.0 for value in values)
    assert values == sorted(values, reverse=True)


def test_lcpfa_falls_with_threshold_on_common_random_numbers(ar1_model, table1_grid, settings):
    values = [
        estimate_lcpfa(StoppingRule.wsr(table1_grid, a), ar1_model, 25, 25, settings).mean for a in (1.0, 2.0, 3.0, 4.0)
    ]
    assert values == sorted(values, reverse=True)


def test_pfa_truncation():
    rho = 0.1
    horizon = pfa_truncation(rho)
    assert (1 - rho) ** (horizon + 1) <= 1e-4 < (1 - rho) ** horizon


def test_weighted_pfa_extremes(ar1_model, table1_grid, always_stop, settings):
    never = estimate_weighted_pfa(StoppingRule.wsr(table1_grid, 1e6), ar1_model, 0.1, settings)
    assert never.mean == 0.0
    assert 0.0 < never.ci95[1] <= 1e-4
    always = estimate_weighted_pfa(always_stop, ar1_model, 0.1, settings)
    assert always.mean == pytest.approx(0.9, abs=1e-4)


@pytest.mark.parametrize("alpha", [0.01, 0.05])
@pytest.mark.parametrize("rho", [0.05, 0.1])
def test_weighted_pfa_respects_bayes_threshold(ar1_model, table1_grid, settings, alpha, rho):
    rule = StoppingRule.wsr(table1_grid, bayes_threshold(alpha, rho=rho))
    estimate = estimate_weighted_pfa(rule, ar1_model, rho, settings)
    assert estimate.mean <= alpha + 3 * estimate.std_error


def test_weighted_pfa_rejects_bad_prior(ar1_model, always_stop, settings):
    with pytest.raises(ParameterError):
        estimate_weighted_pfa(always_stop, ar1_model, 1.0, settings)


def test_statistic_mean_after_one_step_is_one(ar1_model, table1_grid, settings):
    estimate = estimate_statistic_mean(StoppingRule.wsr(table1_grid, 5.0), ar1_model, 1, settings)
    assert estimate.mean == pytest.approx(1.0, rel=1e-12)


def test_statistic_mean_grows_linearly(ar1_model, small_grid, settings):
    estimate = estimate_statistic_mean(StoppingRule.wsr(small_grid, 5.0), ar1_model, 10, settings)
    assert abs(estimate.mean - 10.0) <= 4 * estimate.std_error
