from .data import load_csv, paired_diff, shift_rows
from .engine import (
    ExperimentReport,
    PowerCurvePoint,
    ReplicaResult,
    ReportRow,
    power_curve,
    resolve_workers,
    run_experiment,
    run_replica,
)
from .report import emit_power_curve, emit_report
from .scenario import ScenarioSpec

__all__ = [
    "ExperimentReport",
    "PowerCurvePoint",
    "ReplicaResult",
    "ReportRow",
    "ScenarioSpec",
    "emit_power_curve",
    "emit_report",
    "load_csv",
    "paired_diff",
    "power_curve",
    "resolve_workers",
    "run_experiment",
    "run_replica",
    "shift_rows",
]
