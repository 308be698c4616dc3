"""Information numbers, stationary covariances and first-order delay approximations."""

from quickdetect.info.lyapunov import solve_stationary_covariance
from quickdetect.info.numbers import (
    DegenerateParameterError,
    InfoMethod,
    InfoResult,
    default_delay_cap,
    first_order_risk,
    info_number_ar,
    info_number_empirical,
    info_number_iid,
    information_number,
)

__all__ = [
    "DegenerateParameterError",
    "InfoMethod",
    "InfoResult",
    "default_delay_cap",
    "first_order_risk",
    "info_number_ar",
    "info_number_empirical",
    "info_number_iid",
    "information_number",
    "solve_stationary_covariance",
]
