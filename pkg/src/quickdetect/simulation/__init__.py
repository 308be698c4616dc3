"""Seeded, batched and parallel replication of change scenarios."""

from quickdetect.simulation.engine import (
    THREADS_ENV_VAR,
    Scenario,
    replicate,
    resolve_workers,
    simulate_llr_sums,
    simulate_statistic_paths,
    simulate_stopping_times,
)
from quickdetect.simulation.noise import NOISE_BLOCK, NoiseSource, replication_seed
from quickdetect.simulation.settings import SimulationSettings

__all__ = [
    "NOISE_BLOCK",
    "NoiseSource",
    "Scenario",
    "SimulationSettings",
    "THREADS_ENV_VAR",
    "replicate",
    "replication_seed",
    "resolve_workers",
    "simulate_llr_sums",
    "simulate_statistic_paths",
    "simulate_stopping_times",
]
