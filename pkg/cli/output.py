"""
Reading command inputs and writing command results.

CSV values are written with 15 significant digits and a period as decimal
separator whatever the locale; unit indexes are 1-based.
"""
import csv
import io
import json
import math
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from spread_sampling.exceptions import ParameterDomainError

FORMATS = ("csv", "json")


@dataclass(frozen=True)
class CommandOutput:
    """What a command produces: ``rows`` (header first) for CSV, ``document`` for JSON."""

    rows: list = field(default_factory=list)
    document: dict = field(default_factory=dict)


def format_value(value):
    if value is None:
        return ""
    if isinstance(value, (bool, np.bool_)):
        return "true" if value else "false"
    if isinstance(value, (int, np.integer)):
        return str(int(value))
    if isinstance(value, (float, np.floating)):
        value = float(value)
        if math.isnan(value):
            return "nan"
        return format(value, ".15g")
    return str(value)


def _json_default(value):
    if isinstance(value, np.integer):
        return int(value)
    if isinstance(value, np.floating):
        return float(value)
    if isinstance(value, np.bool_):
        return bool(value)
    if isinstance(value, np.ndarray):
        return value.tolist()
    raise TypeError(f"{type(value).__name__} is not JSON serialisable")


def render(result, fmt):
    if fmt not in FORMATS:
        raise ParameterDomainError(f"unknown output format {fmt!r}, expected one of {', '.join(FORMATS)}")
    if fmt == "json":
        return json.dumps(result.document, indent=2, default=_json_default) + "\n"
    buffer = io.StringIO()
    writer = csv.writer(buffer, lineterminator="\n")
    for row in result.rows:
        writer.writerow([format_value(value) for value in row])
    return buffer.getvalue()


def write_result(result, fmt, path, stream):
    """Writes to ``path`` when given, else to ``stream``."""
    text = render(result, fmt)
    if path:
        try:
            Path(path).write_text(text, encoding="utf-8", newline="")
        except OSError as exc:
            raise ParameterDomainError(f"cannot write {path}: {exc.strerror}")
    else:
        stream.write(text, ending="")


def load_json_argument(value, what):
    """Parses inline JSON, or the JSON file ``value`` names."""
    text = value.strip()
    if not text.startswith(("{", "[")):
        try:
            text = Path(value).read_text(encoding="utf-8")
        except OSError as exc:
            raise ParameterDomainError(f"cannot read {what} file {value}: {exc.strerror}")
    try:
        return json.loads(text)
    except json.JSONDecodeError as exc:
        raise ParameterDomainError(f"malformed JSON {what}: {exc}")


def read_column(path, column, cast):
    """The values of ``column`` in a CSV file with a header row."""
    try:
        with open(path, newline="", encoding="utf-8") as handle:
            rows = list(csv.DictReader(handle))
    except OSError as exc:
        raise ParameterDomainError(f"cannot read {path}: {exc.strerror}")
    if not rows or column not in rows[0]:
        raise ParameterDomainError(f"{path} needs a header row with a {column!r} column")
    try:
        return [cast(row[column]) for row in rows]
    except (TypeError, ValueError):
        raise ParameterDomainError(f"{path}: column {column!r} holds a value that is not a number")


def parse_units(text):
    """'2,5,9' -> [2, 5, 9]."""
    try:
        return [int(part) for part in text.split(",") if part.strip()]
    except ValueError:
        raise ParameterDomainError(f"units must be comma-separated integers, got {text!r}")
