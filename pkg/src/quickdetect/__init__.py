"""
quickdetect - weighted Shiryaev-Roberts change-point detection for dependent data

The library monitors a stream with the weighted Shiryaev-Roberts (WSR) statistic, a mixture of
Shiryaev-Roberts statistics over a grid of candidate post-change parameters, and ships a Monte
Carlo harness that calibrates thresholds against false-alarm constraints and estimates detection
delays.
"""

__version__ = "0.1.0"

from quickdetect.detection import StoppingRule, run_rule, schedule_from_beta  # noqa: E402
from quickdetect.models import ArGaussianModel, ParameterGrid  # noqa: E402

__all__ = ["ArGaussianModel", "ParameterGrid", "StoppingRule", "__version__", "run_rule", "schedule_from_beta"]
