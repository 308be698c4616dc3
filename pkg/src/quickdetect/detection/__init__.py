"""Shiryaev-Roberts statistics, stopping rules and threshold formulas."""

from quickdetect.detection.procedures import RuleKind, RuleOutcome, StoppingRule, run_rule
from quickdetect.detection.statistics import DetectorState, sr_update, step, write_trace_csv, wsr_mix
from quickdetect.detection.thresholds import (
    Alpha1Result,
    ParameterError,
    ScheduleParams,
    bayes_threshold,
    class_alpha1,
    schedule_from_beta,
)

__all__ = [
    "Alpha1Result",
    "DetectorState",
    "ParameterError",
    "RuleKind",
    "RuleOutcome",
    "ScheduleParams",
    "StoppingRule",
    "bayes_threshold",
    "class_alpha1",
    "run_rule",
    "schedule_from_beta",
    "sr_update",
    "step",
    "write_trace_csv",
    "wsr_mix",
]
