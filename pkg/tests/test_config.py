import math

import numpy as np
import pytest

from quickdetect.config import ConfigError, load_config
from quickdetect.detection import RuleKind
from quickdetect.models import ArGaussianModel, ModelFamily, MvLinearRandomCoeffModel

AR1_HEADER = """
[model]
family = "ar-p-gaussian"
a = [0.0]
"""


def write_config(tmp_path, text: str):
    path = tmp_path / "experiment.toml"
    path.write_text(text)
    return path


def test_table1_config(configs_dir):
    config = load_config(configs_dir / "table1.toml")
    assert isinstance(config.change_model, ArGaussianModel)
    assert config.parameter_grid.size == 18
    np.testing.assert_allclose(config.parameter_grid.weights, 1 / 18)
    assert config.rules.kinds == [RuleKind.WSR, RuleKind.SR]
    rows = config.table_rows()
    assert [float(row.theta) for row in rows] == [0.9, 0.8, 0.7, 0.6, 0.5, 0.4]
    assert rows[0].wsr_threshold == pytest.approx(math.log(395))
    assert rows[-1].sr_threshold == pytest.approx(math.log(791))
    assert config.experiment.change_points == [0, 10]


def test_other_shipped_configs(configs_dir):
    ar2 = load_config(configs_dir / "ar2.toml")
    assert ar2.model.family is ModelFamily.AR_P_GAUSSIAN
    assert ar2.change_model.state_dim == 2
    assert ar2.change_model.initial_draws == 2
    mv = load_config(configs_dir / "mv_linear.toml")
    assert isinstance(mv.change_model, MvLinearRandomCoeffModel)
    assert mv.parameter_grid.points.shape == (4, 2, 2)
    assert mv.simulation_settings().delay_cap == 2000


def test_simulation_settings_overrides(configs_dir):
    config = load_config(configs_dir / "table1.toml")
    settings = config.simulation_settings(replications=500, seed=3, threads=2)
    assert (settings.replications, settings.seed, settings.workers) == (500, 3, 2)
    defaults = config.simulation_settings()
    assert (defaults.replications, defaults.seed) == (100_000, 20240611)


def test_empty_grid_rejected(tmp_path):
    path = write_config(tmp_path, AR1_HEADER + "\n[grid]\npoints = []\n")
    with pytest.raises(ConfigError, match="at least one point"):
        load_config(path)


def test_grid_with_pre_change_point_rejected(tmp_path):
    path = write_config(tmp_path, AR1_HEADER + "\n[grid]\npoints = [-0.5, 0.0, 0.5]\n")
    with pytest.raises(ConfigError, match="pre-change parameter"):
        load_config(path)


def test_unstable_model_named_in_error(tmp_path):
    text = '[model]\nfamily = "ar-p-gaussian"\na = [1.02]\n\n[grid]\npoints = [0.5]\n'
    with pytest.raises(ConfigError, match="AR spectral radius 1.02"):
        load_config(write_config(tmp_path, text))


def test_unstable_row_rejected(tmp_path):
    text = AR1_HEADER + "\n[grid]\npoints = [0.5]\n\n[[rules.rows]]\ntheta = 1.5\nexp_a = 100\n"
    with pytest.raises(ConfigError, match="AR spectral radius"):
        load_config(write_config(tmp_path, text))


def test_toml_syntax_error_has_position(tmp_path):
    path = write_config(tmp_path, AR1_HEADER + "\n[grid\npoints = [0.5]\n")
    with pytest.raises(ConfigError, match="line"):
        load_config(path)


def test_missing_file(tmp_path):
    with pytest.raises(ConfigError, match="Cannot read"):
        load_config(tmp_path / "nope.toml")


def test_unknown_key_named_with_its_path(tmp_path):
    path = write_config(tmp_path, AR1_HEADER + "colour = 'red'\n\n[grid]\npoints = [0.5]\n")
    with pytest.raises(ConfigError, match="model.colour"):
        load_config(path)


def test_family_parameters_required(tmp_path):
    path = write_config(tmp_path, '[model]\nfamily = "iid-gaussian-shift"\n\n[grid]\npoints = [1.0]\n')
    with pytest.raises(ConfigError, match="model.mu is required"):
        load_config(path)


def test_experiment_ranges(tmp_path):
    base = AR1_HEADER + "\n[grid]\npoints = [0.5]\n\n[experiment]\n"
    with pytest.raises(ConfigError, match="experiment.replications"):
        load_config(write_config(tmp_path, base + "replications = 10\n"))
    with pytest.raises(ConfigError, match="change_points"):
        load_config(write_config(tmp_path, base + "change_points = [-1]\n"))
