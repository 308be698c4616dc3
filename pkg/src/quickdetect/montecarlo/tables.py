import logging
from collections.abc import Sequence
from typing import NamedTuple

import numpy as np
from numpy.typing import ArrayLike
from pydantic import BaseModel, ConfigDict

from quickdetect.detection import RuleKind, StoppingRule
from quickdetect.info import first_order_risk, information_number
from quickdetect.models import ChangeModel, ParameterGrid
from quickdetect.montecarlo.estimators import estimate_add, estimate_lcpfa
from quickdetect.montecarlo.types import Estimate, LcpfaEstimate
from quickdetect.simulation import SimulationSettings

logger = logging.getLogger(__name__)


class TableRowSpec(NamedTuple):
    """One post-change parameter with the thresholds (in nats) of the rules compared at it."""

    theta: ArrayLike
    wsr_threshold: float
    sr_threshold: float | None = None


class TableRecord(BaseModel):
    """One (θ, ν, rule) cell of an operating-characteristics table."""

    model_config = ConfigDict(frozen=True)

    theta: list[float]
    change_point: int
    rule: RuleKind
    threshold: float
    add: Estimate
    lcpfa: LcpfaEstimate | None
    add_app: float
    add_ratio: float


def run_table(
    model: ChangeModel,
    grid: ParameterGrid,
    rows: Sequence[TableRowSpec],
    change_points: Sequence[int],
    settings: SimulationSettings,
    *,
    kinds: Sequence[RuleKind] = (RuleKind.WSR, RuleKind.SR),
    ell: int | None = None,
    m: int | None = None,
) -> list[TableRecord]:
    """Estimate ADD at every change point (and LCPFA when ℓ and m are given) for each row and rule.

    WSR rules mix over `grid`; SR rules are tuned to the row's θ. Every cell also carries the
    first-order approximation threshold / I_θ and the ratio of the estimate to it.
    """
    model.check_grid(grid)
    records = []
    for row in rows:
        theta = model.validate_theta(row.theta)
        info = information_number(model, theta)
        for kind in kinds:
            if kind is RuleKind.WSR:
                rule = StoppingRule.wsr(grid, row.wsr_threshold)
            elif row.sr_threshold is not None:
                rule = StoppingRule.sr(theta, row.sr_threshold)
            else:
                continue
            lcpfa = None if ell is None or m is None else estimate_lcpfa(rule, model, ell, m, settings)
            add_app = first_order_risk(rule.threshold, info)
            for nu in change_points:
                add = estimate_add(rule, model, theta, nu, settings)
                logger.info(
                    "theta=%s nu=%d %s: ADD=%.3f (se %.3f), ADD_app=%.3f",
                    theta.tolist(),
                    nu,
                    kind.value,
                    add.mean,
                    add.std_error,
                    add_app,
                )
                records.append(
                    TableRecord(
                        theta=np.ravel(theta).tolist(),
                        change_point=nu,
                        rule=kind,
                        threshold=rule.threshold,
                        add=add,
                        lcpfa=lcpfa,
                        add_app=add_app,
                        add_ratio=add.mean / add_app,
                    )
                )
    return records
