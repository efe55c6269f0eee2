"""CSV export and re-import of run logs and metric summaries.

Logs are written as RFC 4180 CSV with a unit-suffixed header and floats at
9 significant digits.  Run metadata goes to a ``<stem>.meta.json`` sidecar
so ``metrics --log`` can recompute the same summary from the CSV alone.
"""
import csv
import json
from pathlib import Path

import numpy as np

from .runner import COLUMNS, RunLog

FLOAT_FORMAT = "{:.9g}"


def _fmt(x):
    return FLOAT_FORMAT.format(float(x))


def meta_path(path):
    path = Path(path)
    return path.with_name(path.stem + ".meta.json")


def export_csv(log, path):
    """Write a :class:`RunLog` (plus its meta sidecar) to ``path``."""
    path = Path(path)
    try:
        with path.open("w", newline="") as fh:
            writer = csv.writer(fh, lineterminator="\r\n")
            writer.writerow(COLUMNS)
            for row in log.data:
                writer.writerow([_fmt(x) for x in row])
        meta = dict(log.meta, aborted=log.aborted)
        meta_path(path).write_text(json.dumps(meta, indent=2, sort_keys=True, default=_jsonable))
    except OSError as exc:
        raise OSError(f"cannot write log {path}: {exc}") from exc
    return path


def read_csv(path):
    """Parse a log written by :func:`export_csv`; returns a :class:`RunLog`."""
    path = Path(path)
    try:
        with path.open(newline="") as fh:
            rows = list(csv.reader(fh))
    except OSError as exc:
        raise OSError(f"cannot read log {path}: {exc}") from exc
    if not rows:
        raise ValueError(f"{path}: empty file (no header)")
    header = rows[0]
    if header != COLUMNS:
        raise ValueError(f"{path}: unexpected column layout")
    body = rows[1:]
    for i, row in enumerate(body, 2):
        if len(row) != len(header):
            raise ValueError(f"{path}:{i}: expected {len(header)} fields, got {len(row)}")
    data = np.array(body, dtype=float).reshape(len(body), len(header))
    meta = {}
    sidecar = meta_path(path)
    if sidecar.exists():
        meta = json.loads(sidecar.read_text())
    return RunLog(data=data, meta=meta, aborted=meta.get("aborted", ""))


def export_summary(summary, path, extra=None):
    """Write scalar metrics as a two-column ``metric,value`` CSV."""
    path = Path(path)
    items = dict(extra or {})
    items.update(summary.scalars())
    try:
        with path.open("w", newline="") as fh:
            writer = csv.writer(fh, lineterminator="\r\n")
            writer.writerow(["metric", "value"])
            for key, val in items.items():
                writer.writerow([key, _fmt(val) if isinstance(val, (float, np.floating)) else val])
    except OSError as exc:
        raise OSError(f"cannot write summary {path}: {exc}") from exc
    return path


def export_smoothed(log, summary, path):
    """Time series of the smoothed position error, for error plots."""
    path = Path(path)
    with path.open("w", newline="") as fh:
        writer = csv.writer(fh, lineterminator="\r\n")
        writer.writerow(["t_s", "error_m", "smoothed_error_m"])
        err = np.linalg.norm(log.vec("p", "m") - log.vec("p_des", "m"), axis=1)
        for t, e, s in zip(log.t, err, summary.smoothed_error_m):
            writer.writerow([_fmt(t), _fmt(e), _fmt(s)])
    return path


def summary_json(summary):
    out = summary.scalars()
    out["settings"] = summary.settings
    return json.dumps(out, indent=2, sort_keys=True, default=_jsonable)


def _jsonable(obj):
    if isinstance(obj, np.generic):
        return obj.item()
    if isinstance(obj, np.ndarray):
        return obj.tolist()
    raise TypeError(f"not serializable: {type(obj).__name__}")
