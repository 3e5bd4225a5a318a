"""Helper functions for rendering and configuring harness-lab."""

import csv
import io
import json
import logging
import os
from typing import Dict, Iterable, List, Optional, Sequence

from dotenv import dotenv_values
from pydantic import BaseModel, ValidationError

from harness_lab.models.errors import ConfigError
from harness_lab.models.model import CliConfig, ParamPoint, VerificationConfig, VerificationReport

SEED_ENV = "HARNESS_LAB_SEED"
LOG_LEVEL_ENV = "HARNESS_LAB_LOG_LEVEL"
CORS_ENV = "HARNESS_LAB_CORS_ORIGINS"
LOG_FORMAT = "%(asctime)s - %(levelname)s - %(message)s"


def format_scalar(value) -> str:
    """Rationals as "p/q", floats via repr, radicals in sympy form such as "-2*sqrt(26)/13"."""
    if isinstance(value, float):
        return repr(value)
    return str(value)


def rows_to_csv(rows: Iterable[BaseModel], fields: Sequence[str]) -> str:
    """CSV with a header line; "\\n" line endings so output is byte-stable across platforms."""
    buffer = io.StringIO()
    writer = csv.writer(buffer, lineterminator="\n")
    writer.writerow(fields)
    for row in rows:
        data = row.model_dump()
        writer.writerow([data[field] for field in fields])
    return buffer.getvalue()


def rows_to_json(rows: Iterable[BaseModel]) -> str:
    return json.dumps([row.model_dump(mode="json") for row in rows], indent=2) + "\n"


def report_to_json(report: VerificationReport) -> str:
    return report.model_dump_json(indent=2) + "\n"


def summary_table(report: VerificationReport) -> str:
    """Plain-text summary: counts, failed checks, and coverage by family."""
    summary = report.summary
    lines = [
        f"suite: {report.suite.value}  version: {report.version}  seed: {report.seed}",
        f"total: {summary.total}  passed: {summary.passed}  failed: {summary.failed}  "
        f"skipped: {summary.skipped}",
    ]
    failed = [result for result in report.results if not result.passed and not result.skipped]
    if failed:
        lines.append("")
        lines.append("failed checks:")
        for result in failed:
            lines.append(f"  {result.check_id}  [{result.parameter_point}]  residual={result.residual}")
    if report.coverage:
        width = max(len(entry.tag) for entry in report.coverage)
        lines.append("")
        lines.append(f"{'family'.ljust(width)}  checks  passed")
        for entry in report.coverage:
            lines.append(f"{entry.tag.ljust(width)}  {entry.checks:>6}  {entry.passed:>6}")
    for note in report.notes:
        lines.append(f"note: {note}")
    return "\n".join(lines) + "\n"


def load_config_file(path: str) -> Dict[str, str]:
    """Read a key=value file; comments and blank lines are ignored."""
    if not os.path.isfile(path):
        raise ConfigError(f"config file not found: {path}")
    values = dotenv_values(path)
    return {key: value for key, value in values.items() if value is not None}


def env_seed() -> Optional[int]:
    raw = os.getenv(SEED_ENV)
    if raw is None or not raw.strip():
        return None
    try:
        return int(raw)
    except ValueError as e:
        raise ConfigError(f"{SEED_ENV} must be an integer, got {raw!r}") from e


def log_level(verbose: bool = False) -> int:
    if verbose:
        return logging.DEBUG
    name = os.getenv(LOG_LEVEL_ENV, "INFO").upper()
    level = logging.getLevelName(name)
    return level if isinstance(level, int) else logging.INFO


def cors_origins() -> List[str]:
    """Browser origins allowed to call the API; comma separated in HARNESS_LAB_CORS_ORIGINS."""
    raw = os.getenv(CORS_ENV, "http://localhost:8000")
    return [origin.strip() for origin in raw.split(",") if origin.strip()]


def split_list(value) -> List[str]:
    if isinstance(value, str):
        return [item.strip() for item in value.split(",") if item.strip()]
    return list(value)


POINT_FIELDS = ("case1_points", "case2_points", "minimal_points")


def verification_config(values: Dict[str, str]) -> VerificationConfig:
    """VerificationConfig from flat key=value strings.

    Point lists are "A,B,C,N;A,B,C,N", grid lists "t,t,t;t,t" and plain
    lists comma separated.
    """
    fields = {}
    try:
        for key, raw in values.items():
            if key not in VerificationConfig.model_fields:
                continue
            if key in POINT_FIELDS:
                fields[key] = [ParamPoint.parse(item) for item in raw.split(";") if item.strip()]
            elif key == "k_values":
                fields[key] = [int(item) for item in split_list(raw)]
            elif key == "stitched_grids":
                fields[key] = [split_list(grid) for grid in raw.split(";") if grid.strip()]
            else:
                fields[key] = raw
        return VerificationConfig(**fields)
    except ValueError as e:
        raise ConfigError(f"invalid verification config: {e}") from e


def cli_config(values: Dict[str, str], overrides: Dict[str, object]) -> CliConfig:
    """CliConfig from file values, overridden by options that were actually given."""
    fields: Dict[str, object] = {key: value for key, value in values.items() if key in CliConfig.model_fields}
    fields.update({key: value for key, value in overrides.items() if value is not None})
    try:
        return CliConfig(**fields)
    except ValidationError as e:
        raise ConfigError(f"invalid options: {e}") from e
