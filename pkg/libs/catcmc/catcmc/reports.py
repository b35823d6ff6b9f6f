"""Machine-readable run reports and plot-ready tables."""
import json
import logging
from pathlib import Path
from typing import Any, Literal, Optional

import pandas as pd
from pydantic import BaseModel, Field

logger = logging.getLogger(__name__)

SCHEMA_VERSION = "v1"
REPORT_NAME = "report.json"


class CheckResult(BaseModel):
    name: str
    passed: bool
    measured: dict[str, Any] = Field(default_factory=dict)
    thresholds: dict[str, Any] = Field(default_factory=dict)
    note: str = ""


class Report(BaseModel):
    schema_version: Literal["v1"] = SCHEMA_VERSION
    command: str
    config: dict[str, Any] = Field(default_factory=dict)
    results: dict[str, Any] = Field(default_factory=dict)
    checks: list[CheckResult] = Field(default_factory=list)
    error: Optional[dict[str, Any]] = None


def dumps(report: Report) -> str:
    """Canonical JSON: sorted keys, two-space indent, trailing newline."""
    return json.dumps(report.model_dump(mode="json"), sort_keys=True, indent=2) + "\n"


def write_report(report: Report, output_dir: Path) -> Path:
    output_dir = Path(output_dir)
    output_dir.mkdir(parents=True, exist_ok=True)
    path = output_dir / REPORT_NAME
    path.write_text(dumps(report), encoding="utf-8")
    logger.info("wrote %s", path)
    return path


def write_table(frame: pd.DataFrame, output_dir: Path, name: str) -> Path:
    output_dir = Path(output_dir)
    output_dir.mkdir(parents=True, exist_ok=True)
    path = output_dir / name
    frame.to_csv(path, index=False, lineterminator="\n", encoding="utf-8")
    logger.info("wrote %s (%d rows)", path, len(frame))
    return path
