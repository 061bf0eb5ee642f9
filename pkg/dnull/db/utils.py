import csv
import json
import logging
import math
import re

from dnull.common.exceptions import ConfigurationError
from dnull.db.tables import CSV_COLUMNS, RiskReport
from dnull.workflows import settings

logger = logging.getLogger(__name__)


def format_value(value):
    """Floats with 17 significant digits, everything else as str"""
    if isinstance(value, float):
        return format(value, settings.FLOAT_FORMAT)
    return str(value)


def write_csv(report, fhandle):
    writer = csv.writer(fhandle, lineterminator="\n")
    writer.writerow(CSV_COLUMNS)
    for row in report.rows:
        writer.writerow([format_value(value) for value in row.csv_values()])


_FLOAT_TAG = "\x00float:"
_TAGGED_FLOAT = re.compile(r'"\\u0000float:([^"]+)"')


def _tag_floats(value):
    """Finite floats -> tagged 17-digit strings, non-finite floats -> None"""
    if isinstance(value, float):
        return _FLOAT_TAG + format_value(value) if math.isfinite(value) else None
    if isinstance(value, dict):
        return {key: _tag_floats(item) for key, item in value.items()}
    if isinstance(value, (list, tuple)):
        return [_tag_floats(item) for item in value]
    return value


def write_json(report, fhandle):
    """All report fields; floats as in the CSV table, NaN and infinities as null"""
    text = json.dumps(_tag_floats(report.as_dict()), indent=2, allow_nan=False)
    fhandle.write(_TAGGED_FLOAT.sub(r"\1", text))
    fhandle.write("\n")


def emit(report, path, fmt=settings.OUTPUT_FORMAT):
    """Write a RiskReport as CSV (table columns only) or JSON (all fields)"""
    writers = {"csv": write_csv, "json": write_json}
    if fmt not in writers:
        raise ConfigurationError(f"unknown output format '{fmt}', choose csv or json")
    try:
        with open(path, "w", encoding="utf8", newline="") as fhandle:
            writers[fmt](report, fhandle)
    except OSError as exc:
        raise ConfigurationError(f"cannot write {path}: {exc}") from exc
    logger.info("wrote %d rows to %s", len(report.rows), path)
    return path


def load_report(path):
    """Read a JSON report back into a RiskReport"""
    try:
        with open(path, "r", encoding="utf8") as fhandle:
            return RiskReport.from_dict(json.load(fhandle))
    except (OSError, ValueError) as exc:
        raise ConfigurationError(f"cannot read report {path}: {exc}") from exc
