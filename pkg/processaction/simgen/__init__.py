"""Implements a synthetic loan-process simulator."""

__all__ = [
    "ActivitySpec",
    "Branch",
    "Gateway",
    "ProcessModel",
    "validate_model",
    "load_model",
    "load_preset",
    "available_presets",
    "generate_log",
    "simulate_case",
    "replay_trace",
    "CaseOutcome",
    "SimResult",
    "SimReport",
    "simulate_with_policy",
    "simulate_log_policy",
    "simulate_policies",
]

from .generator import CaseOutcome, generate_log, replay_trace, simulate_case
from .model import (
    ActivitySpec,
    Branch,
    Gateway,
    ProcessModel,
    available_presets,
    load_model,
    load_preset,
    validate_model,
)
from .simulation import (
    SimReport,
    SimResult,
    simulate_log_policy,
    simulate_policies,
    simulate_with_policy,
)
