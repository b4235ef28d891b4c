"""Result export: CSV data files plus a JSON report.

CSV content is a pure function of the experiment config and master seed
(floats are written with repr), so re-running a config reproduces the
files byte-for-byte; volatile metadata such as wall time only goes into
the JSON report.
"""

from __future__ import annotations

import csv
import json
import os

import numpy as np


def _fmt(value):
    if isinstance(value, (bool, np.bool_)):
        return str(bool(value))
    if isinstance(value, (float, np.floating)):
        return repr(float(value))
    if isinstance(value, (int, np.integer)):
        return str(int(value))
    return str(value)


def write_rows_csv(path, rows: list[dict]) -> None:
    if not rows:
        raise ValueError("no rows to write")
    os.makedirs(os.path.dirname(os.path.abspath(path)), exist_ok=True)
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh)
        header = list(rows[0].keys())
        writer.writerow(header)
        for row in rows:
            writer.writerow([_fmt(row[k]) for k in header])


def write_map_csv(path, times, sites, values) -> None:
    """Space-time map rows: (r, t, value)."""
    os.makedirs(os.path.dirname(os.path.abspath(path)), exist_ok=True)
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(["r", "t", "value"])
        for it, t in enumerate(times):
            for ir, r in enumerate(sites):
                writer.writerow([str(int(r)), repr(float(t)), repr(float(values[it, ir]))])


def write_report_json(path, report) -> None:
    os.makedirs(os.path.dirname(os.path.abspath(path)), exist_ok=True)
    payload = {
        "experiment": report.experiment,
        "summary": _jsonable(report.summary),
        "metadata": _jsonable(report.metadata),
        "rows": _jsonable(report.rows),
    }
    with open(path, "w") as fh:
        json.dump(payload, fh, indent=1)


def _jsonable(obj):
    if isinstance(obj, dict):
        return {str(k): _jsonable(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_jsonable(v) for v in obj]
    if isinstance(obj, (np.floating, np.integer)):
        return obj.item()
    if isinstance(obj, np.ndarray):
        return obj.tolist()
    if isinstance(obj, (np.bool_,)):
        return bool(obj)
    return obj
