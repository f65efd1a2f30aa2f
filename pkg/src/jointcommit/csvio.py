"""Versioned CSV files, the only data channel between components.

Every file starts with ``# jointcommit-csv <schema> v<version>`` followed by a
regular header row.  Consumers must refuse files whose schema version they do
not understand.
"""

from __future__ import annotations

import csv
from pathlib import Path

import numpy as np

HEADER_PREFIX = "# jointcommit-csv"

SCHEMA_VERSIONS = {
    "trajectory": 1,
    "timeseries": 1,
    "sweep": 1,
    "fixation": 1,
    "reputation": 1,
    "compositions": 1,
}


def schema_line(schema: str) -> str:
    return f"{HEADER_PREFIX} {schema} v{SCHEMA_VERSIONS[schema]}"


def _cell(v) -> str:
    if isinstance(v, (bool, np.bool_)):
        return "1" if v else "0"
    if isinstance(v, (float, np.floating)):
        return repr(float(v))
    if isinstance(v, np.integer):
        return str(int(v))
    return str(v)


def write_csv(path: str | Path, schema: str, columns: list[str], rows) -> Path:
    """Write rows (iterable of sequences) under a versioned schema header."""
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    with open(path, "w", newline="") as fh:
        fh.write(schema_line(schema) + "\n")
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow(columns)
        for row in rows:
            writer.writerow([_cell(v) for v in row])
    return path


def read_csv(path: str | Path) -> tuple[str, int, list[str], list[list[str]]]:
    """Read a versioned CSV; raises on unknown schema or version mismatch."""
    path = Path(path)
    with open(path, newline="") as fh:
        first = fh.readline().strip()
        if not first.startswith(HEADER_PREFIX):
            raise ValueError(f"{path}: missing '{HEADER_PREFIX}' schema line")
        try:
            schema, vtag = first[len(HEADER_PREFIX):].split()
            version = int(vtag.lstrip("v"))
        except ValueError:
            raise ValueError(f"{path}: malformed schema line {first!r}") from None
        if SCHEMA_VERSIONS.get(schema) != version:
            raise ValueError(
                f"{path}: schema {schema} v{version} not supported "
                f"(expected v{SCHEMA_VERSIONS.get(schema)})"
            )
        reader = csv.reader(fh)
        columns = next(reader)
        return schema, version, columns, [row for row in reader]
