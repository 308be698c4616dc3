"""
Operating characteristics of the WSR and tuned SR rules for an AR(1) coefficient change from 0.

The published delays were obtained from 10^6 replications. The slow tests rerun the whole table
at 10^5 replications; the default suite checks one cell at a smaller scale.
"""

import math

import pytest

from quickdetect.config import load_config
from quickdetect.detection import RuleKind, StoppingRule
from quickdetect.montecarlo import estimate_add, estimate_statistic_mean, run_table
from quickdetect.simulation import SimulationSettings

WSR_DELAYS = {
    0.9: (395, 11.74, 10.05),
    0.8: (420, 14.72, 12.72),
    0.7: (440, 18.97, 16.59),
    0.6: (470, 25.32, 22.55),
    0.5: (595, 36.35, 32.96),
    0.4: (1040, 59.57, 55.34),
}
SR_B = 791
SR_DELAYS = {
    0.9: (11.08, 9.62),
    0.8: (13.72, 11.98),
    0.7: (17.52, 15.30),
    0.6: (23.15, 20.34),
    0.5: (31.84, 28.01),
    0.4: (45.88, 40.83),
}


def test_wsr_delay_after_late_change(ar1_model, table1_grid):
    settings = SimulationSettings(replications=20_000, seed=20240611, workers=1, delay_cap=2000)
    rule = StoppingRule.wsr(table1_grid, math.log(395.0))
    add = estimate_add(rule, ar1_model, [0.9], 10, settings)
    assert add.mean == pytest.approx(10.05, rel=0.05)
    assert add.censor_rate == 0.0


def test_wsr_delay_after_immediate_change(ar1_model, table1_grid):
    settings = SimulationSettings(replications=20_000, seed=20240611, workers=1, delay_cap=2000)
    rule = StoppingRule.wsr(table1_grid, math.log(395.0))
    add = estimate_add(rule, ar1_model, [0.9], 0, settings)
    assert add.mean == pytest.approx(11.74, rel=0.05)
    assert add.censor_rate == 0.0


def test_sr_delay_after_late_change(ar1_model):
    settings = SimulationSettings(replications=20_000, seed=20240611, workers=1, delay_cap=2000)
    add = estimate_add(StoppingRule.sr(0.9, math.log(SR_B)), ar1_model, [0.9], 10, settings)
    assert add.mean == pytest.approx(9.62, rel=0.05)


@pytest.mark.slow
def test_full_table(configs_dir):
    config = load_config(configs_dir / "table1.toml")
    assert config.experiment.replications == 100_000
    records = run_table(
        config.change_model, config.parameter_grid, config.table_rows(), [0, 10], config.simulation_settings()
    )
    cells = {(record.theta[0], record.rule, record.change_point): record.add for record in records}
    for theta, (_, worst, late) in WSR_DELAYS.items():
        assert cells[theta, RuleKind.WSR, 0].mean == pytest.approx(worst, rel=0.03)
        assert cells[theta, RuleKind.WSR, 10].mean == pytest.approx(late, rel=0.03)
    for theta, (worst, late) in SR_DELAYS.items():
        assert cells[theta, RuleKind.SR, 0].mean == pytest.approx(worst, rel=0.03)
        assert cells[theta, RuleKind.SR, 10].mean == pytest.approx(late, rel=0.03)
    for theta in WSR_DELAYS:
        for kind in RuleKind:
            worst, late = cells[theta, kind, 0], cells[theta, kind, 10]
            spread = math.hypot(worst.std_error, late.std_error)
            assert worst.mean - late.mean > 2 * spread


@pytest.mark.slow
@pytest.mark.parametrize("n", [1, 10, 50])
def test_mixture_statistic_is_a_martingale(ar1_model, small_grid, n):
    settings = SimulationSettings(replications=100_000, seed=99)
    estimate = estimate_statistic_mean(StoppingRule.wsr(small_grid, 5.0), ar1_model, n, settings)
    assert abs(estimate.mean - n) <= 3 * estimate.std_error + 1e-9
