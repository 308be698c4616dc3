"""
Experiment configuration files.

A config is one TOML file:

    [model]            family plus its pre-change parameters
    [grid]             post-change points and optional weights (uniform when omitted)
    [rules]            rule kinds, schedule knobs, and [[rules.rows]] with per-θ thresholds
    [experiment]       replications, seed, change points, LCPFA window, caps

Model and grid invariants are checked while the file is loaded, so a config that loads is runnable.
"""

import logging
import math
import tomllib
from pathlib import Path
from typing import Any

import numpy as np
from pydantic import BaseModel, ConfigDict, Field, PrivateAttr, ValidationError, model_validator

from quickdetect.detection import RuleKind
from quickdetect.models import (
    ArGaussianModel,
    ChangeModel,
    IidGaussianShiftModel,
    ModelFamily,
    MvLinearRandomCoeffModel,
    ParameterGrid,
)
from quickdetect.montecarlo import TableRowSpec
from quickdetect.simulation import SimulationSettings

logger = logging.getLogger(__name__)


class ConfigError(ValueError):
    """Raised when a config file cannot be read, parsed or validated."""
    pass


class ModelSection(BaseModel):
    model_config = ConfigDict(extra="forbid", frozen=True)

    family: ModelFamily
    a: list[float] | None = None
    stationary_start: bool = False
    mu: list[float] | None = None
    a0: list[list[float]] | None = None
    q0: list[list[float]] | None = None
    q1: list[list[float]] | None = None

    def build(self) -> ChangeModel:
        match self.family:
            case ModelFamily.AR_P_GAUSSIAN:
                if self.a is None:
                    raise ValueError("model.a is required for the ar-p-gaussian family")
                return ArGaussianModel(np.asarray(self.a), stationary_start=self.stationary_start)
            case ModelFamily.IID_GAUSSIAN_SHIFT:
                if self.mu is None:
                    raise ValueError("model.mu is required for the iid-gaussian-shift family")
                return IidGaussianShiftModel(np.asarray(self.mu))
            case ModelFamily.MV_LINEAR_RANDOM_COEFF:
                if self.a0 is None or self.q0 is None or self.q1 is None:
                    raise ValueError("model.a0, model.q0 and model.q1 are required for mv-linear-random-coeff")
                return MvLinearRandomCoeffModel(np.asarray(self.a0), np.asarray(self.q0), np.asarray(self.q1))


class GridSection(BaseModel):
    model_config = ConfigDict(extra="forbid", frozen=True)

    points: list[Any]
    weights: list[float] | None = None

    def build(self) -> ParameterGrid:
        if self.weights is None:
            return ParameterGrid.uniform(self.points)
        return ParameterGrid.weighted(self.points, self.weights)


class TableRow(BaseModel):
    """Thresholds of one table row as printed: e^a for WSR and B for the tuned SR rule."""

    model_config = ConfigDict(extra="forbid", frozen=True)

    theta: float | list[float] | list[list[float]]
    exp_a: float = Field(gt=0.0)
    b: float | None = Field(default=None, gt=0.0)

    def spec(self) -> TableRowSpec:
        return TableRowSpec(
            theta=np.asarray(self.theta, dtype=float),
            wsr_threshold=math.log(self.exp_a),
            sr_threshold=None if self.b is None else math.log(self.b),
        )


class RulesSection(BaseModel):
    model_config = ConfigDict(extra="forbid", frozen=True)

    kinds: list[RuleKind] = [RuleKind.WSR, RuleKind.SR]
    kappa_check: float = Field(default=1.0, gt=0.0)
    delta_star: float = Field(default=0.5, gt=0.0, lt=1.0)
    rows: list[TableRow] = []


class ExperimentSection(BaseModel):
    model_config = ConfigDict(extra="forbid", frozen=True)

    replications: int = Field(default=100_000, ge=100)
    seed: int = Field(default=0, ge=0)
    change_points: list[int] = [0, 10]
    moment_orders: list[float] = [1.0]
    ell: int = Field(default=25, ge=1)
    m: int = Field(default=25, ge=1)
    delay_cap: int | None = Field(default=None, ge=1)
    threads: int | None = Field(default=None, ge=1)
    batch_size: int = Field(default=4096, ge=1)
    burn_in: int = Field(default=1000, ge=0)

    @model_validator(mode="after")
    def _check_ranges(self) -> "ExperimentSection":
        if any(nu < 0 for nu in self.change_points):
            raise ValueError("change_points must be nonnegative")
        if any(r < 1 for r in self.moment_orders):
            raise ValueError("moment_orders must be >= 1")
        return self


class ExperimentConfig(BaseModel):
    model_config = ConfigDict(extra="forbid", frozen=True)

    model: ModelSection
    grid: GridSection
    rules: RulesSection = RulesSection()
    experiment: ExperimentSection = ExperimentSection()

    _change_model: ChangeModel = PrivateAttr()
    _grid: ParameterGrid = PrivateAttr()

    @model_validator(mode="after")
    def _check_invariants(self) -> "ExperimentConfig":
        change_model = self.model.build()
        grid = self.grid.build()
        change_model.check_grid(grid)
        for row in self.rules.rows:
            change_model.validate_theta(row.theta)
        self._change_model = change_model
        self._grid = grid
        return self

    @property
    def change_model(self) -> ChangeModel:
        return self._change_model

    @property
    def parameter_grid(self) -> ParameterGrid:
        return self._grid

    def table_rows(self) -> list[TableRowSpec]:
        return [row.spec() for row in self.rules.rows]

    def simulation_settings(
        self, *, replications: int | None = None, seed: int | None = None, threads: int | None = None
    ) -> SimulationSettings:
        """Engine settings from the [experiment] section, with command-line overrides."""
        experiment = self.experiment
        return SimulationSettings(
            replications=experiment.replications if replications is None else replications,
            seed=experiment.seed if seed is None else seed,
            delay_cap=experiment.delay_cap,
            workers=experiment.threads if threads is None else threads,
            batch_size=experiment.batch_size,
        )


def load_config(path: Path) -> ExperimentConfig:
    """Read and validate a TOML experiment config.

    Raises:
        ConfigError: With the TOML line and column for syntax errors, or the dotted key path and the
            violated invariant for schema errors.
    """
    try:
        text = path.read_text()
    except OSError as e:
        raise ConfigError(f"Cannot read config {path}: {e}") from e
    try:
        data = tomllib.loads(text)
    except tomllib.TOMLDecodeError as e:
        raise ConfigError(f"{path}: invalid TOML: {e}") from e
    try:
        config = ExperimentConfig.model_validate(data)
    except ValidationError as e:
        problems = "; ".join(
            f"{'.'.join(str(part) for part in error['loc']) or '<root>'}: {error['msg']}" for error in e.errors()
        )
        raise ConfigError(f"{path}: {problems}") from e
    logger.debug("Loaded %s (%s, %d grid points)", path, config.model.family.value, config.parameter_grid.size)
    return config
