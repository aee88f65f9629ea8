"""Result emission: fixed-schema rows rendered as table, CSV or JSON.

Row schema for performance results (documented; CSV column order is
fixed):

    axis, axis_value, overlay, overlay_value,
    p_detect, p_s1, p_s2, p_s3, p_eff_one, key_rate_bps, qber, method,
    se_p_detect, se_p_eff_one, se_key_rate_bps, se_qber

Floats are serialized with 17 significant digits so a JSON or CSV
round-trip reproduces them bit-exactly.
"""

from __future__ import annotations

import json

from .analytics import PerformanceReport
from .sweep import SweepResult

__all__ = ["PERF_COLUMNS", "report_rows", "sweep_rows", "render", "emit"]

PERF_COLUMNS = [
    "axis",
    "axis_value",
    "overlay",
    "overlay_value",
    "p_detect",
    "p_s1",
    "p_s2",
    "p_s3",
    "p_eff_one",
    "key_rate_bps",
    "qber",
    "method",
    "se_p_detect",
    "se_p_eff_one",
    "se_key_rate_bps",
    "se_qber",
]


def _perf_fields(report: PerformanceReport) -> dict:
    se = report.se or {}
    return {
        "p_detect": report.p_detect,
        "p_s1": report.p_s1,
        "p_s2": report.p_s2,
        "p_s3": report.p_s3,
        "p_eff_one": report.p_eff_one,
        "key_rate_bps": report.key_rate,
        "qber": report.qber,
        "method": report.method,
        "se_p_detect": se.get("p_detect"),
        "se_p_eff_one": se.get("p_eff_one"),
        "se_key_rate_bps": se.get("key_rate"),
        "se_qber": se.get("qber"),
    }


def report_rows(report: PerformanceReport) -> list[dict]:
    row = {"axis": "", "axis_value": None, "overlay": "", "overlay_value": None}
    row.update(_perf_fields(report))
    return [row]


def sweep_rows(result: SweepResult) -> list[dict]:
    rows = []
    for r in result.rows:
        row = {
            "axis": result.spec.axis,
            "axis_value": r.axis_value,
            "overlay": result.spec.overlay or "",
            "overlay_value": r.overlay_value,
        }
        row.update(_perf_fields(r.report))
        rows.append(row)
    return rows


def _fmt(value) -> str:
    if value is None:
        return ""
    if isinstance(value, float):
        return format(value, ".17g")
    return str(value)


def render(rows: list[dict], fmt: str, columns: list[str] | None = None) -> str:
    """Render rows as 'table', 'csv' or 'json' text."""
    if not rows:
        return ""
    cols = columns or list(rows[0].keys())
    if fmt == "csv":
        lines = [",".join(cols)]
        lines += [",".join(_fmt(row.get(c)) for c in cols) for row in rows]
        return "\n".join(lines) + "\n"
    if fmt == "json":
        return json.dumps([{c: row.get(c) for c in cols} for row in rows], indent=2) + "\n"
    if fmt == "table":
        cells = [[_shorten(row.get(c)) for c in cols] for row in rows]
        widths = [max(len(c), *(len(r[i]) for r in cells)) for i, c in enumerate(cols)]
        head = "  ".join(c.ljust(w) for c, w in zip(cols, widths))
        body = ["  ".join(v.ljust(w) for v, w in zip(r, widths)) for r in cells]
        return "\n".join([head] + body) + "\n"
    raise ValueError(f"unknown format {fmt!r}")


def _shorten(value) -> str:
    if value is None:
        return "-"
    if isinstance(value, float):
        return format(value, ".6g")
    return str(value)


def emit(rows_or_result, fmt: str, columns: list[str] | None = None) -> str:
    """Convenience wrapper accepting a report, sweep result, or raw rows."""
    if isinstance(rows_or_result, PerformanceReport):
        return render(report_rows(rows_or_result), fmt, PERF_COLUMNS)
    if isinstance(rows_or_result, SweepResult):
        return render(sweep_rows(rows_or_result), fmt, PERF_COLUMNS)
    return render(list(rows_or_result), fmt, columns)
