from __future__ import annotations

import csv
import io
import sys

from .engine import ExperimentReport

REPORT_HEADER = (
    "scenario", "method", "n", "p", "k", "c", "alpha", "replicas",
    "reject_rate", "mc_se", "comm_bytes", "analytic_power",
)
POWER_CURVE_HEADER = ("c", "k", "method", "empirical_power", "analytic_power", "mc_se")

NA = "NA"


def fmt(value) -> str:
    """Six significant digits; ``NA`` for missing or non-finite values."""
    if value is None:
        return NA
    value = float(value)
    if value != value or value in (float("inf"), float("-inf")):
        return NA
    return format(value, ".6g")


def report_rows(report: ExperimentReport) -> list:
    out = []
    for r in report.rows:
        if r.available:
            measured = [str(r.replicas), fmt(r.reject_rate), fmt(r.mc_standard_error), str(r.comm_bytes)]
        else:
            measured = [NA, NA, NA, NA]
        out.append(
            [r.scenario, r.method.value, str(r.n), str(r.p), str(r.k), fmt(r.c), fmt(r.alpha)]
            + measured
            + [fmt(r.analytic_power)]
        )
    return out


def _write(path, header, rows) -> None:
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(header)
    writer.writerows(rows)
    if path in (None, "-"):
        sys.stdout.write(buf.getvalue())
        return
    with open(path, "w", encoding="utf-8", newline="") as fh:
        fh.write(buf.getvalue())


def emit_report(report: ExperimentReport, path) -> None:
    """Write the report CSV; rows keep scenario order, then method order."""
    _write(path, REPORT_HEADER, report_rows(report))


def emit_power_curve(points, path) -> None:
    rows = [
        [fmt(pt.c), str(pt.k), pt.method.value, fmt(pt.empirical_power), fmt(pt.analytic_power), fmt(pt.mc_se)]
        for pt in points
    ]
    _write(path, POWER_CURVE_HEADER, rows)
