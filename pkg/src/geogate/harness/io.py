"""CSV and JSON writers with a versioned header."""

from __future__ import annotations

import csv
import io
import json
from pathlib import Path

import numpy as np


def _plain(v):
    if isinstance(v, (np.floating, float)):
        return float(v)
    if isinstance(v, np.integer):
        return int(v)
    if isinstance(v, (tuple, list)):
        return [_plain(x) for x in v]
    return v


def _cell(v) -> str:
    v = _plain(v)
    if isinstance(v, float):
        return repr(v)
    if isinstance(v, list):
        return " ".join(_cell(x) for x in v)
    return str(v)


def rows_to_csv(rows: list[dict], version: str) -> str:
    """``# version`` line, header from the union of keys (first-seen order), one line per row."""
    keys: list[str] = []
    for r in rows:
        keys.extend(k for k in r if k not in keys)
    buf = io.StringIO()
    buf.write(f"# {version}\n")
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(keys)
    for r in rows:
        w.writerow([_cell(r.get(k, "")) for k in keys])
    return buf.getvalue()


def rows_to_json(rows: list[dict] | dict, version: str) -> str:
    if isinstance(rows, dict):
        payload = {"version": version, **{k: _plain(v) for k, v in rows.items()}}
    else:
        payload = {"version": version, "rows": [{k: _plain(v) for k, v in r.items()} for r in rows]}
    return json.dumps(payload, indent=2, sort_keys=False) + "\n"


def write_output(rows, version: str, path: str | None) -> str:
    """Serialize by file extension (``.json`` or CSV otherwise); ``None`` returns the CSV text only."""
    if path is not None and Path(path).suffix.lower() == ".json":
        text = rows_to_json(rows, version)
    else:
        text = rows_to_csv(rows if isinstance(rows, list) else [rows], version)
    if path is not None:
        Path(path).write_text(text)
    return text


def read_csv(path_or_text: str) -> tuple[str, list[dict]]:
    """Inverse of :func:`rows_to_csv` (values stay strings); returns the version and rows."""
    text = Path(path_or_text).read_text() if "\n" not in path_or_text else path_or_text
    first, rest = text.split("\n", 1)
    return first.lstrip("# ").strip(), list(csv.DictReader(io.StringIO(rest)))
