"""Implements event logs and the trace-level KPI."""

__all__ = [
    "Event",
    "Trace",
    "EventLog",
    "EventLogSchema",
    "frequency",
    "position",
    "read_jsonl",
    "write_jsonl",
    "CsvSchema",
    "parse_csv",
    "write_csv",
    "KpiSpec",
    "enrich",
    "trace_reward",
    "work_hours",
    "decision_contexts",
    "has_decision_point",
    "split",
    "summary",
]

from .base import Event, EventLog, Trace, frequency, position, read_jsonl, write_jsonl
from .kpi import KpiSpec, enrich, trace_reward, work_hours
from .parser import CsvSchema, parse_csv, write_csv
from .schema import EventLogSchema
from .utils import decision_contexts, has_decision_point, split, summary
