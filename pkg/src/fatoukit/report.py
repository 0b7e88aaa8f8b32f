"""Aggregate run artifacts into a pass/fail table."""

import csv
import io
import json
import math
from pathlib import Path

from .errors import MissingArtifactError

RESULT_FILE = "result.json"
MANIFEST_FILE = "manifest.json"
COLUMNS = ("command", "anchor", "measured", "target", "tolerance", "passed")


def check_row(anchor, measured, target=None, tolerance=None, passed=None):
    """One table row; ``passed`` defaults to ``|measured - target| <= tolerance``."""
    if passed is None:
        if target is None or tolerance is None:
            raise ValueError("give passed or both target and tolerance")
        passed = abs(float(measured) - float(target)) <= float(tolerance)
    return {"anchor": anchor, "measured": _plain(measured), "target": _plain(target),
            "tolerance": _plain(tolerance), "passed": bool(passed)}


def _plain(v):
    if v is None or isinstance(v, (str, bool)):
        return v
    if isinstance(v, (list, tuple)):
        return [_plain(x) for x in v]
    f = float(v)
    return f if math.isfinite(f) else str(f)


def collect(paths):
    """Rows from every run directory (or ``result.json``) in ``paths``.

    Raises :class:`MissingArtifactError` listing every absent result or
    manifest file.
    """
    paths = [Path(p) for p in paths]
    if not paths:
        raise MissingArtifactError("no run artifacts given", missing=[])
    missing, rows = [], []
    for p in paths:
        res = p if p.name == RESULT_FILE else p / RESULT_FILE
        man = res.parent / MANIFEST_FILE
        for f in (res, man):
            if not f.is_file():
                missing.append(str(f))
        if not res.is_file() or not man.is_file():
            continue
        data = json.loads(res.read_text())
        for row in data.get("checks", []):
            rows.append({"command": data.get("command", "?"), **row})
    if missing:
        raise MissingArtifactError("missing artifacts: " + ", ".join(missing), missing=missing)
    return rows


def format_table(rows):
    """Fixed-width text table with a final pass count line."""
    head = ("command", "anchor", "measured", "target", "tol", "result")
    body = [(r["command"], r["anchor"], _fmt(r["measured"]), _fmt(r["target"]),
             _fmt(r["tolerance"]), "PASS" if r["passed"] else "FAIL") for r in rows]
    widths = [max(len(str(c)) for c in col) for col in zip(head, *body)]
    lines = ["  ".join(str(c).ljust(w) for c, w in zip(line, widths)) for line in [head] + body]
    ok = sum(r["passed"] for r in rows)
    lines.append(f"{ok}/{len(rows)} checks passed")
    return "\n".join(lines)


def _fmt(v):
    if v is None:
        return "-"
    if isinstance(v, float):
        return f"{v:.6g}"
    if isinstance(v, list):
        return "[" + ", ".join(_fmt(x) for x in v) + "]"
    return str(v)


def to_csv(rows):
    buf = io.StringIO()
    w = csv.DictWriter(buf, fieldnames=COLUMNS)
    w.writeheader()
    for r in rows:
        w.writerow({k: json.dumps(r[k]) if isinstance(r[k], list) else r[k] for k in COLUMNS})
    return buf.getvalue()
