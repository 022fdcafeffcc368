"""Implements policy learning on a mined MDP."""

__all__ = [
    "ScalingFn",
    "h_value",
    "scaled_q",
    "MdpEnvironment",
    "Move",
    "QTable",
    "Policy",
    "TrainConfig",
    "greedy_action",
    "ranked_actions",
    "extract_policy",
    "save_policy",
    "load_policy",
    "mc_policy_iteration",
    "q_learning",
    "value_iteration",
    "optimal_actions",
    "state_visit_probability",
]

from .base import (
    Policy,
    QTable,
    TrainConfig,
    extract_policy,
    greedy_action,
    load_policy,
    ranked_actions,
    save_policy,
)
from .dynprog import optimal_actions, state_visit_probability, value_iteration
from .environment import MdpEnvironment, Move
from .montecarlo import mc_policy_iteration
from .qlearning import q_learning
from .scaling import ScalingFn, h_value, scaled_q
