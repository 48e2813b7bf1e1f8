"""Artifact files: CSV tables with exact numbers, and JSON summaries."""

import csv
import json
import math
from collections.abc import Iterable, Sequence
from pathlib import Path

import numpy as np

from .._errors import InsufficientDataError
from .._util import fmt_number

# Columns that hold the per-iteration gap, in order of preference.
#
GAP_COLUMNS = ('gap', 'value_gap')


def _cell(v) -> str:
    if v is None:
        return ''

    if isinstance(v, str):
        return v

    return fmt_number(v)


def write_csv(path: Path | str, rows: Iterable[dict], columns: Sequence[str]) -> Path:
    """Write rows as CSV with a header; numbers have 17 significant digits, None is an empty cell."""

    path = Path(path)
    with open(path, 'w', encoding='utf-8', newline='') as f:
        writer = csv.writer(f, lineterminator='\n')
        writer.writerow(columns)
        for row in rows:
            writer.writerow([_cell(row.get(c)) for c in columns])

    return path


def _jsonable(v):
    if isinstance(v, dict):
        return {str(k): _jsonable(x) for k, x in v.items()}

    if isinstance(v, (list, tuple, np.ndarray)):
        return [_jsonable(x) for x in v]

    if isinstance(v, (bool, np.bool_)):
        return bool(v)

    if isinstance(v, (int, np.integer)):
        return int(v)

    if isinstance(v, (float, np.floating)):
        f = float(v)
        return f if math.isfinite(f) else None

    return v


def write_json(path: Path | str, summary: dict) -> Path:
    """Write a summary as indented JSON with sorted keys; non-finite numbers become null."""

    path = Path(path)
    with open(path, 'w', encoding='utf-8') as f:
        json.dump(_jsonable(summary), f, indent=2, sort_keys=True)
        f.write('\n')

    return path


def read_rows(path: Path | str) -> list[dict[str, str]]:
    with open(path, encoding='utf-8', newline='') as f:
        return list(csv.DictReader(f))


def read_gaps(path: Path | str) -> np.ndarray:
    """Read the per-iteration gap column of a trace CSV (``gap`` for policy improvement, ``value_gap`` for learning)."""

    rows = read_rows(path)
    if not rows:
        raise InsufficientDataError(f'{path} has no rows')

    column = next((c for c in GAP_COLUMNS if c in rows[0]), None)
    if column is None:
        raise InsufficientDataError(f'{path} has none of the gap columns {GAP_COLUMNS}')

    return np.array([float(row[column]) for row in rows if row[column] != ''], dtype=float)
