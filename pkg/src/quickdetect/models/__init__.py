"""Observation models, parameter grids and path simulation."""

from quickdetect.models.families import (
    ArGaussianModel,
    ChangeModel,
    IidGaussianShiftModel,
    MvLinearRandomCoeffModel,
    companion_matrix,
    spectral_radius,
)
from quickdetect.models.paths import export_path_csv, llr_increment, simulate_path
from quickdetect.models.types import (
    GridError,
    ModelError,
    ModelFamily,
    ParameterGrid,
    PathSpec,
    StateError,
    UnstableModelError,
)

__all__ = [
    "ArGaussianModel",
    "ChangeModel",
    "GridError",
    "IidGaussianShiftModel",
    "ModelError",
    "ModelFamily",
    "MvLinearRandomCoeffModel",
    "ParameterGrid",
    "PathSpec",
    "StateError",
    "UnstableModelError",
    "companion_matrix",
    "export_path_csv",
    "llr_increment",
    "simulate_path",
]
