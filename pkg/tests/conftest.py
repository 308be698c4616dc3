from pathlib import Path

import numpy as np
import pytest

from quickdetect.models import ArGaussianModel, ParameterGrid
from quickdetect.simulation import SimulationSettings

CONFIGS_DIR = Path(__file__).resolve().parents[1] / "configs"


@pytest.fixture
def anyio_backend():
    return "asyncio"


@pytest.fixture
def configs_dir() -> Path:
    return CONFIGS_DIR


@pytest.fixture
def ar1_model() -> ArGaussianModel:
    return ArGaussianModel(np.array([0.0]))


@pytest.fixture
def table1_grid() -> ParameterGrid:
    """18 coefficients ±0.1, ..., ±0.9 with uniform weights."""
    points = [round(s * k / 10, 1) for s in (-1, 1) for k in range(1, 10)]
    return ParameterGrid.uniform(sorted(points))


@pytest.fixture
def small_grid() -> ParameterGrid:
    """Coefficients with |θ| <= 0.4, for which the AR(1) likelihood ratio has finite variance."""
    return ParameterGrid.uniform([-0.4, -0.3, -0.2, -0.1, 0.1, 0.2, 0.3, 0.4])


@pytest.fixture
def settings() -> SimulationSettings:
    return SimulationSettings(replications=2000, seed=1234, workers=1)
