import json
import os
from datetime import datetime, timezone
from pathlib import Path

import click
import jsonschema
import numpy as np
import pandas as pd

from utils.scan_functions import SERIES_COLUMNS, TimeSeries

REPORT_SCHEMA = {
    "type": "object",
    "properties": {
        "scenario": {"type": "string"},
        "certificate": {
            "type": "object",
            "properties": {
                "tau": {"type": "number"},
                "global_phase": {
                    "type": "object",
                    "properties": {"re": {"type": "number"}, "im": {"type": "number"}},
                    "required": ["re", "im"],
                },
                "max_deviation": {"type": "number"},
                "certified": {"type": "boolean"},
                "tolerance": {"type": "number"},
            },
            "required": ["certified"],
        },
        "commensurability": {
            "type": "object",
            "properties": {
                "found": {"type": "boolean"},
                "quantum": {"type": "number"},
                "base": {"type": "number"},
                "integers": {"type": "array", "items": {"type": "integer"}},
                "max_residual": {"type": ["number", "null"]},
            },
            "required": ["found"],
        },
        "parity": {"type": "object"},
        "relations": {"type": "object"},
    },
    "required": ["certificate"],
}


def save_run_log(command, scenario, status, detail="", csv_file="registro_runs.csv"):
    """
    Guarda un registro de la ejecucion en un archivo CSV.

    Args:
        command (str): Subcommand that ran
        scenario (str): Scenario name or config path
        status (str): "ok", "validation_error" or "numerical_failure"
        detail (str): Short result or error text
        csv_file (str): Registry file (created with a header on first write)

    Returns:
        bool: True when the row was written
    """
    log_entry = {
        "timestamp": datetime.now(timezone.utc).isoformat(),
        "command": command,
        "scenario": scenario,
        "status": status,
        "detail": detail,
    }

    df_log = pd.DataFrame([log_entry])

    try:
        if os.path.isfile(csv_file):
            df_log.to_csv(csv_file, mode="a", header=False, index=False)
        else:
            df_log.to_csv(csv_file, index=False)
        return True
    except OSError as e:
        click.echo(f"Error saving run log: {e}", err=True)
        return False


def get_run_logs(csv_file="registro_runs.csv", limit=50):
    """
    Tail of the run registry.

    Returns:
        pandas.DataFrame: Up to `limit` rows, empty when the file is missing
    """
    try:
        if os.path.isfile(csv_file):
            return pd.read_csv(csv_file).tail(limit)
        return pd.DataFrame()
    except (OSError, pd.errors.ParserError) as e:
        click.echo(f"Error reading run log: {e}", err=True)
        return pd.DataFrame()


def emit_csv(series: TimeSeries, path) -> Path:
    """
    Write t,fidelity,mmc,overlap_bound with 17 significant digits.

    Raises:
        OSError: With the path in the message
    """
    path = Path(path)
    try:
        path.parent.mkdir(parents=True, exist_ok=True)
        series.to_frame()[SERIES_COLUMNS].to_csv(path, index=False, float_format="%.17g", lineterminator="\n")
    except OSError as e:
        raise OSError(f"cannot write series to {path}: {e}") from e
    return path


def _jsonable(value):
    if isinstance(value, dict):
        return {str(k): _jsonable(v) for k, v in value.items()}
    if isinstance(value, np.ndarray):
        return [_jsonable(v) for v in value.tolist()]
    if isinstance(value, (list, tuple)):
        return [_jsonable(v) for v in value]
    if isinstance(value, (np.bool_, bool)):
        return bool(value)
    if isinstance(value, (np.integer,)):
        return int(value)
    if isinstance(value, (np.floating, float)):
        value = float(value)
        return value if np.isfinite(value) else None
    if isinstance(value, (complex, np.complexfloating)):
        value = complex(value)
        return {"re": value.real, "im": value.imag}
    return value


def write_json(document: dict, path) -> Path:
    """Sorted keys and a fixed indent so equal runs give equal bytes."""
    document = _jsonable(document)
    path = Path(path)
    try:
        path.parent.mkdir(parents=True, exist_ok=True)
        path.write_text(json.dumps(document, indent=2, sort_keys=True) + "\n", encoding="utf-8")
    except OSError as e:
        raise OSError(f"cannot write report to {path}: {e}") from e
    return path


def validate_report(report: dict) -> dict:
    """JSON form of a report, checked against REPORT_SCHEMA."""
    document = _jsonable(report)
    jsonschema.validate(document, REPORT_SCHEMA)
    return document


def emit_report(report: dict, path) -> Path:
    """
    Write one run report (certificate, commensurability, parity, relations).

    Raises:
        jsonschema.ValidationError: If the report does not match REPORT_SCHEMA
        OSError: With the path in the message
    """
    validate_report(report)
    return write_json(report, path)
