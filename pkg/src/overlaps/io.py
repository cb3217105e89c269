"""Tabular output: CSV with a '#'-prefixed metadata header, or JSON with the same schema.

Floats are written with ``repr`` so a re-read reproduces them exactly.
"""
from __future__ import annotations

import csv
import io
import json
import math
from pathlib import Path

import numpy as np

from . import __version__

CONVENTIONS = {
    "density_normalization": "integrates to N over the plane",
    "overlap_normalization": "same convention as the density; conditional = overlap/density",
}


def _fmt(v) -> str:
    if v is None:
        return ""
    if isinstance(v, bool):
        return str(v).lower()
    if isinstance(v, float):
        return repr(float(v))
    if isinstance(v, np.integer):
        return str(int(v))
    return str(v)


def _json_value(v):
    if isinstance(v, np.integer):
        return int(v)
    if isinstance(v, float):
        v = float(v)
        if not math.isfinite(v):
            return None if math.isnan(v) else repr(v)
    return v


def _json_default(o):
    if isinstance(o, np.generic):
        return o.item()
    if hasattr(o, "value"):
        return o.value
    return str(o)


def metadata(meta: dict) -> dict:
    out = {"version": __version__}
    out.update(CONVENTIONS)
    out.update(meta)
    return out


def render_csv(rows: list[dict], meta: dict, columns: list[str] | None = None) -> str:
    if columns is None:
        columns = list(rows[0].keys()) if rows else []
    buf = io.StringIO()
    for k, v in metadata(meta).items():
        buf.write(f"# {k}: {json.dumps(v, default=_json_default) if isinstance(v, (list, tuple, dict)) else _fmt(v)}\n")
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(columns)
    for r in rows:
        w.writerow([_fmt(r.get(c)) for c in columns])
    return buf.getvalue()


def render_json(rows: list[dict], meta: dict, columns: list[str] | None = None) -> str:
    if columns is None:
        columns = list(rows[0].keys()) if rows else []
    doc = {
        "metadata": metadata(meta),
        "columns": columns,
        "rows": [{c: _json_value(r.get(c)) for c in columns} for r in rows],
    }
    return json.dumps(doc, indent=2, default=_json_default) + "\n"


def render(rows: list[dict], meta: dict, fmt: str = "csv", columns: list[str] | None = None) -> str:
    if fmt == "json":
        return render_json(rows, meta, columns)
    return render_csv(rows, meta, columns)


def write(path, rows: list[dict], meta: dict, fmt: str = "csv", columns: list[str] | None = None) -> Path:
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    path.write_text(render(rows, meta, fmt, columns))
    return path


def _parse_cell(s: str):
    if s == "":
        return None
    if s in ("true", "false"):
        return s == "true"
    try:
        return int(s)
    except ValueError:
        pass
    try:
        return float(s)
    except ValueError:
        return s


def read_csv(path) -> tuple[list[dict], dict]:
    """Inverse of :func:`render_csv`: rows (numbers parsed) and the metadata header."""
    meta, body = {}, []
    for line in Path(path).read_text().splitlines():
        if line.startswith("# "):
            k, _, v = line[2:].partition(": ")
            meta[k] = v
        else:
            body.append(line)
    reader = csv.DictReader(body)
    rows = [{k: _parse_cell(v) for k, v in r.items()} for r in reader]
    return rows, meta
