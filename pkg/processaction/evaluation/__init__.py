"""Implements the evaluation of policies on a test log and in simulation."""

__all__ = [
    "policy_states",
    "decisions_followed",
    "compliant_from",
    "OptimalTraceResult",
    "PrefixGainResult",
    "optimal_trace_analysis",
    "prefix_gain_analysis",
    "welch_test",
    "compare_policies",
    "difference_matrix",
    "EvalReport",
    "evaluate_log",
    "write_json",
    "write_tables",
    "OptimalTraceSchema",
    "PrefixGainSchema",
    "PairwiseSchema",
]

from .compliance import (
    OptimalTraceResult,
    PrefixGainResult,
    compliant_from,
    decisions_followed,
    optimal_trace_analysis,
    policy_states,
    prefix_gain_analysis,
)
from .report import EvalReport, evaluate_log, write_json, write_tables
from .schema import OptimalTraceSchema, PairwiseSchema, PrefixGainSchema
from .significance import compare_policies, difference_matrix, welch_test
