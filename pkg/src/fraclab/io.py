"""Deterministic JSON/CSV emission (stable key order, 17 significant digits)."""

from __future__ import annotations

import csv
import io
import json
import math
import os
import tempfile
from typing import Dict, Iterable, List, Sequence

import numpy as np


def to_plain(obj):
    """Recursively convert numpy scalars/arrays and tuples to JSON-ready values."""
    if isinstance(obj, dict):
        return {str(k): to_plain(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [to_plain(v) for v in obj]
    if isinstance(obj, np.ndarray):
        return to_plain(obj.tolist())
    if isinstance(obj, (np.bool_,)):
        return bool(obj)
    if isinstance(obj, np.integer):
        return int(obj)
    if isinstance(obj, (np.floating, float)):
        v = float(obj)
        if math.isnan(v):
            return "nan"
        if math.isinf(v):
            return "inf" if v > 0 else "-inf"
        return v
    if hasattr(obj, "to_dict"):
        return to_plain(obj.to_dict())
    return obj


def json_text(report) -> str:
    return json.dumps(to_plain(report), sort_keys=True, indent=2) + "\n"


def _fmt(v) -> str:
    if isinstance(v, (bool, np.bool_)):
        return "true" if v else "false"
    if isinstance(v, (int, np.integer)):
        return str(int(v))
    if isinstance(v, (float, np.floating)):
        return format(float(v), ".17g")
    return str(v)


def csv_text(header: Sequence[str], rows: Iterable[Sequence]) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(list(header))
    for row in rows:
        w.writerow([_fmt(v) for v in row])
    return buf.getvalue()


def table_from_records(records: List[Dict], columns: Sequence[str]):
    return list(columns), [[rec[c] for c in columns] for rec in records]


def write_files(out_dir: str, files: Dict[str, str], overwrite: bool = False) -> List[str]:
    """Write all files or none: every target is checked before anything is written."""
    os.makedirs(out_dir, exist_ok=True)
    targets = {name: os.path.join(out_dir, name) for name in files}
    if not overwrite:
        clash = [p for p in targets.values() if os.path.exists(p)]
        if clash:
            raise FileExistsError(f"refusing to overwrite {clash[0]} (pass --overwrite)")
    staged = []
    try:
        for name, text in files.items():
            fd, tmp = tempfile.mkstemp(dir=out_dir, prefix=".tmp-")
            with os.fdopen(fd, "w", encoding="utf-8", newline="") as fh:
                fh.write(text)
            staged.append((tmp, targets[name]))
    except BaseException:
        for tmp, _ in staged:
            os.unlink(tmp)
        raise
    for tmp, target in staged:
        os.replace(tmp, target)
    return sorted(targets.values())


def emit_json(report, path: str, overwrite: bool = False) -> str:
    d, name = os.path.split(os.path.abspath(path))
    write_files(d, {name: json_text(report)}, overwrite)
    return path


def emit_csv(header: Sequence[str], rows: Iterable[Sequence], path: str, overwrite: bool = False) -> str:
    d, name = os.path.split(os.path.abspath(path))
    write_files(d, {name: csv_text(header, rows)}, overwrite)
    return path
