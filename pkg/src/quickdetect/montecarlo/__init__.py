"""Monte Carlo estimators, threshold calibration and diagnostics."""

from quickdetect.montecarlo.calibration import CalibrationError, calibrate_threshold, first_passage_times
from quickdetect.montecarlo.diagnostics import max_llr_diagnostic, slln_diagnostic
from quickdetect.montecarlo.estimators import (
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
from quickdetect.montecarlo.tables import TableRecord, TableRowSpec, run_table
from quickdetect.montecarlo.types import (
    CalibrationResult,
    Estimate,
    LcpfaEstimate,
    LcpfaTarget,
    MaxRiskEstimate,
)

__all__ = [
    "CalibrationError",
    "CalibrationResult",
    "Estimate",
    "EstimationError",
    "LcpfaEstimate",
    "LcpfaTarget",
    "MaxRiskEstimate",
    "TableRecord",
    "TableRowSpec",
    "calibrate_threshold",
    "estimate_add",
    "estimate_lcpfa",
    "estimate_max_risk",
    "estimate_moment_risk",
    "estimate_statistic_mean",
    "estimate_weighted_pfa",
    "first_passage_times",
    "lcpfa_from_times",
    "max_llr_diagnostic",
    "moment_from_times",
    "pfa_truncation",
    "run_table",
    "slln_diagnostic",
]
