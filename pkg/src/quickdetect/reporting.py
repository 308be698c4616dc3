"""
Result files and run manifests.

Table CSVs have one row per (θ, ν, rule) cell with the fixed column order in TABLE_COLUMNS. Every
output directory gets a manifest.json echoing the configuration, the seed and a SHA-256 of each
output file.
"""

import csv
import hashlib
import io
import json
import logging
from collections.abc import Mapping, Sequence
from datetime import UTC, datetime
from pathlib import Path
from typing import Any

from pydantic import BaseModel, Field

from quickdetect import __version__
from quickdetect.montecarlo import Estimate, TableRecord

logger = logging.getLogger(__name__)

MANIFEST_NAME = "manifest.json"

TABLE_COLUMNS = [
    "theta",
    "nu",
    "rule",
    "threshold",
    "add",
    "add_se",
    "add_ci_low",
    "add_ci_high",
    "n_used",
    "censor_rate",
    "discard_rate",
    "lcpfa",
    "lcpfa_se",
    "add_app",
    "add_ratio",
]

ESTIMATE_COLUMNS = ["label", "mean", "std_error", "ci_low", "ci_high", "n_used", "censor_rate", "discard_rate"]


def format_theta(theta: Sequence[float]) -> str:
    return repr(theta[0]) if len(theta) == 1 else ";".join(repr(value) for value in theta)


def table_row(record: TableRecord) -> dict[str, Any]:
    return {
        "theta": format_theta(record.theta),
        "nu": record.change_point,
        "rule": record.rule.value,
        "threshold": record.threshold,
        "add": record.add.mean,
        "add_se": record.add.std_error,
        "add_ci_low": record.add.ci95[0],
        "add_ci_high": record.add.ci95[1],
        "n_used": record.add.n_used,
        "censor_rate": record.add.censor_rate,
        "discard_rate": record.add.discard_rate,
        "lcpfa": "" if record.lcpfa is None else record.lcpfa.mean,
        "lcpfa_se": "" if record.lcpfa is None else record.lcpfa.std_error,
        "add_app": record.add_app,
        "add_ratio": record.add_ratio,
    }


def render_csv(columns: Sequence[str], rows: Sequence[Mapping[str, Any]]) -> str:
    buffer = io.StringIO()
    writer = csv.DictWriter(buffer, fieldnames=columns, lineterminator="\n")
    writer.writeheader()
    writer.writerows(rows)
    return buffer.getvalue()


def table_csv(records: Sequence[TableRecord]) -> str:
    return render_csv(TABLE_COLUMNS, [table_row(record) for record in records])


def write_table_csv(path: Path, records: Sequence[TableRecord]) -> None:
    path.parent.mkdir(parents=True, exist_ok=True)
    path.write_text(table_csv(records))


def estimate_row(label: str, estimate: Estimate) -> dict[str, Any]:
    return {
        "label": label,
        "mean": estimate.mean,
        "std_error": estimate.std_error,
        "ci_low": estimate.ci95[0],
        "ci_high": estimate.ci95[1],
        "n_used": estimate.n_used,
        "censor_rate": estimate.censor_rate,
        "discard_rate": estimate.discard_rate,
    }


def estimates_csv(estimates: Mapping[str, Estimate]) -> str:
    """One row per labelled estimate, columns in ESTIMATE_COLUMNS order."""
    return render_csv(ESTIMATE_COLUMNS, [estimate_row(label, estimate) for label, estimate in estimates.items()])


def write_estimates_csv(path: Path, estimates: Mapping[str, Estimate]) -> None:
    path.parent.mkdir(parents=True, exist_ok=True)
    path.write_text(estimates_csv(estimates))


def write_json(path: Path, payload: Any) -> None:
    path.parent.mkdir(parents=True, exist_ok=True)
    path.write_text(json.dumps(payload, indent=2, sort_keys=True) + "\n")


def file_sha256(path: Path) -> str:
    return hashlib.sha256(path.read_bytes()).hexdigest()


class RunManifest(BaseModel):
    """Everything needed to re-run a command and check that its outputs are unchanged."""

    tool_version: str
    command: str
    parameters: dict[str, Any] = Field(default_factory=dict)
    config: dict[str, Any] | None = None
    seed: int | None = None
    started_at: str
    finished_at: str | None = None
    outputs: dict[str, str] = Field(default_factory=dict)

    @classmethod
    def start(
        cls,
        command: str,
        *,
        parameters: dict[str, Any] | None = None,
        config: dict[str, Any] | None = None,
        seed: int | None = None,
    ) -> "RunManifest":
        return cls(
            tool_version=__version__,
            command=command,
            parameters=parameters or {},
            config=config,
            seed=seed,
            started_at=datetime.now(UTC).isoformat(),
        )

    def finish(self, out_dir: Path, outputs: Sequence[Path]) -> Path:
        """Hash the outputs, stamp the end time and write manifest.json into `out_dir`."""
        manifest = self.model_copy(
            update={
                "finished_at": datetime.now(UTC).isoformat(),
                "outputs": {path.name: file_sha256(path) for path in outputs},
            }
        )
        path = out_dir / MANIFEST_NAME
        write_json(path, manifest.model_dump(mode="json"))
        logger.info("Wrote %s with %d outputs", path, len(outputs))
        return path
